#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "graphsmile/error.hpp"
#include "graphsmile/heads.hpp"
#include "graphsmile/model.hpp"
#include "graphsmile/synthetic.hpp"
#include "support.hpp"

using namespace graphsmile;
using testing_support::random_matrix;

namespace {

// Row-wise softmax of H * W + b and the mean cross-entropy, written out scalar by scalar.
struct HeadOracle {
  Matrix probs;
  double loss = 0.0;
};

HeadOracle head_oracle(const Matrix& h, const Matrix& w, const Matrix& b, const std::vector<int>& targets) {
  HeadOracle o{Matrix(h.rows(), w.cols()), 0.0};
  for (std::size_t i = 0; i < h.rows(); ++i) {
    std::vector<double> z(w.cols());
    double mx = -1e300;
    for (std::size_t c = 0; c < w.cols(); ++c) {
      z[c] = b(0, c);
      for (std::size_t k = 0; k < h.cols(); ++k) z[c] += h(i, k) * w(k, c);
      mx = std::max(mx, z[c]);
    }
    double denom = 0.0;
    for (double v : z) denom += std::exp(v - mx);
    for (std::size_t c = 0; c < w.cols(); ++c) o.probs(i, c) = std::exp(z[c] - mx) / denom;
    o.loss += -std::log(o.probs(i, static_cast<std::size_t>(targets[i])));
  }
  o.loss /= static_cast<double>(h.rows());
  return o;
}

}  // namespace

TEST_SUITE("model_heads") {
  TEST_CASE("zero weights give uniform rows and class 0") {
    std::mt19937_64 rng(1);
    HeadParams p = HeadParams::create(4, 6, 3, rng);
    p.emotion_weight.value.fill(0.0);
    p.sentiment_weight.value.fill(0.0);
    Tape tape;
    Var h = tape.constant(random_matrix(5, 4, rng));
    const HeadOutput e = emotion_head(h, p);
    const HeadOutput s = sentiment_head(h, p);
    for (double v : e.probs.data()) CHECK(std::abs(v - 1.0 / 6.0) <= 1e-15);
    for (double v : s.probs.data()) CHECK(std::abs(v - 1.0 / 3.0) <= 1e-15);
    for (int c : e.preds) CHECK(c == 0);
    for (int c : s.preds) CHECK(c == 0);
    const std::vector<int> te{0, 5, 2, 3, 1};
    const std::vector<int> ts{0, 2, 1, 1, 0};
    CHECK(std::abs(emotion_loss(e, te).value()(0, 0) - std::log(6.0)) <= 1e-12);
    CHECK(std::abs(std::log(6.0) - 1.7918) < 1e-4);
    CHECK(std::abs(sentiment_loss(s, ts).value()(0, 0) - std::log(3.0)) <= 1e-12);
  }

  TEST_CASE("one-hot logits pick their class and give near-zero loss") {
    Tape tape;
    const std::vector<int> cls{2, 0, 1};
    Matrix h(3, 3);
    for (std::size_t i = 0; i < 3; ++i) h(i, static_cast<std::size_t>(cls[i])) = 1.0;
    Var w = tape.constant(Matrix::identity(3) * 60.0);
    Var b = tape.constant(Matrix(1, 3));
    const HeadOutput out = linear_softmax_head(tape.constant(h), w, b);
    CHECK(out.preds == cls);
    CHECK(emotion_loss(out, cls).value()(0, 0) <= 1e-20);
  }

  TEST_CASE("heads and losses match the scalar oracle") {
    std::mt19937_64 rng(2);
    HeadParams p = HeadParams::create(5, 4, 3, rng);
    p.emotion_bias.value = random_matrix(1, 4, rng);
    p.sentiment_bias.value = random_matrix(1, 3, rng);
    Tape tape;
    const Matrix h = random_matrix(6, 5, rng, -2.0, 2.0);
    const std::vector<int> te{3, 0, 1, 2, 2, 0};
    const std::vector<int> ts{2, 0, 1, 1, 2, 0};
    const HeadOutput e = emotion_head(tape.constant(h), p);
    const HeadOutput s = sentiment_head(tape.constant(h), p);
    const HeadOracle oe = head_oracle(h, p.emotion_weight.value, p.emotion_bias.value, te);
    const HeadOracle os = head_oracle(h, p.sentiment_weight.value, p.sentiment_bias.value, ts);
    CHECK(max_abs_diff(e.probs, oe.probs) <= 1e-12);
    CHECK(max_abs_diff(s.probs, os.probs) <= 1e-12);
    CHECK(std::abs(emotion_loss(e, te).value()(0, 0) - oe.loss) <= 1e-12);
    CHECK(std::abs(sentiment_loss(s, ts).value()(0, 0) - os.loss) <= 1e-12);
    CHECK(e.preds == argmax_rows(oe.probs));
    CHECK(emotion_head(tape.constant(h), p).probs == e.probs);
  }

  TEST_CASE("head errors") {
    std::mt19937_64 rng(3);
    HeadParams p = HeadParams::create(4, 3, 3, rng);
    Tape tape;
    const HeadOutput e = emotion_head(tape.constant(random_matrix(2, 4, rng)), p);
    CHECK_THROWS_AS(emotion_loss(e, std::vector<int>{0, -1}), LabelingError);
    CHECK_THROWS_AS(emotion_loss(e, std::vector<int>{0, 3}), RangeError);
    CHECK_THROWS_AS(emotion_head(tape.constant(random_matrix(2, 5, rng)), p), ShapeError);
  }

  TEST_CASE("total loss composition") {
    const LossReport r = total_loss(1.0, 2.0, 3.0, 0.5, 0.2);
    CHECK(std::abs(r.total - 2.6) <= 1e-15);
    CHECK(total_loss(1.25, 7.0, 9.0, 0.0, 0.0).total == 1.25);
    const LossReport iemocap = total_loss(0.4, 0.3, 0.2, 1.0, 0.7);
    CHECK(iemocap.lambda_s == 1.0);
    CHECK(iemocap.lambda_o == 0.7);
    CHECK(std::abs(iemocap.total - (0.4 + 0.3 + 0.7 * 0.2)) <= 1e-15);
    CHECK_THROWS_AS(total_loss(1.0, 1.0, 1.0, -0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(total_loss(1.0, 1.0, 1.0, 0.0, -1.0), ConfigError);

    Tape tape;
    Var le = tape.constant(Matrix{{1.0}});
    Var ls = tape.constant(Matrix{{2.0}});
    Var lo = tape.constant(Matrix{{3.0}});
    CHECK(std::abs(total_loss(le, ls, lo, 0.5, 0.2).value()(0, 0) - 2.6) <= 1e-15);
    // Linear in each component.
    for (double x : {0.0, 0.5, 4.0}) {
      const double a = total_loss(x, 2.0, 3.0, 0.3, 0.9).total;
      const double b = total_loss(2.0 * x, 2.0, 3.0, 0.3, 0.9).total;
      CHECK(std::abs((b - a) - x) <= 1e-12);
    }
  }

  TEST_CASE("lambda_o scales the shift head gradient") {
    const auto scheme = synthetic_scheme(4);
    std::mt19937_64 rng(4);
    const Dialogue d = testing_support::make_dialogue("d", {0, 1, 2, 3, 1}, scheme, {3, 3, 3}, rng);
    Dataset ds;
    ds.scheme = scheme;
    ds.dims = {3, 3, 3};
    ds.dialogues = {d};
    RunConfig rc;
    rc.dim = rc.hidden = 4;
    rc.depth = 2;
    rc.past = rc.future = 1;
    rc.segment = 3;
    rc.dropout = 0.0;
    const ModelParams init = ModelParams::create(model_shape(ds, rc), 1);

    auto shift_grad = [&](double lambda_o) {
      ModelParams p = init;
      RunConfig c = rc;
      c.lambda_o = lambda_o;
      Tape tape;
      std::mt19937_64 unused(0);
      tape.backward(forward_dialogue(tape, d, p, c, false, unused).loss);
      return p.heads.shift_weight.grad;
    };
    const Matrix g1 = shift_grad(1.0);
    const Matrix g3 = shift_grad(3.0);
    CHECK(max_abs(g1) > 0.0);
    CHECK(max_abs_diff(g3, g1 * 3.0) <= 1e-12 * max_abs(g3));
    CHECK(max_abs(shift_grad(0.0)) == 0.0);
  }

  TEST_CASE("lambda_s leaves the emotion head gradient alone") {
    const auto scheme = synthetic_scheme(4);
    std::mt19937_64 rng(5);
    const Dialogue d = testing_support::make_dialogue("d", {3, 1, 2, 0}, scheme, {2, 3, 2}, rng);
    Dataset ds;
    ds.scheme = scheme;
    ds.dims = {2, 3, 2};
    ds.dialogues = {d};
    RunConfig rc;
    rc.dim = rc.hidden = 4;
    rc.depth = 2;
    rc.past = rc.future = 1;
    rc.segment = 4;
    rc.dropout = 0.0;
    const ModelParams init = ModelParams::create(model_shape(ds, rc), 2);

    auto grads = [&](double lambda_s) {
      ModelParams p = init;
      RunConfig c = rc;
      c.lambda_s = lambda_s;
      Tape tape;
      std::mt19937_64 unused(0);
      tape.backward(forward_dialogue(tape, d, p, c, false, unused).loss);
      return std::pair{p.heads.emotion_weight.grad, p.heads.sentiment_weight.grad};
    };
    const auto [e0, s0] = grads(0.0);
    const auto [e1, s1] = grads(1.0);
    CHECK(e0 == e1);
    CHECK(max_abs(s0) == 0.0);
    CHECK(max_abs(s1) > 0.0);
  }
}

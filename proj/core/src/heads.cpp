#include "graphsmile/heads.hpp"

#include <array>
#include <string>

#include "graphsmile/error.hpp"
#include "graphsmile/gsf.hpp"

namespace graphsmile {

HeadParams HeadParams::create(std::size_t hidden, std::size_t num_emotions, std::size_t num_sentiments,
                              std::mt19937_64& rng) {
  HeadParams p;
  p.emotion_weight = Param("head.emotion.weight", xavier_uniform(hidden, num_emotions, rng));
  p.emotion_bias = Param("head.emotion.bias", Matrix(1, num_emotions), false);
  p.sentiment_weight = Param("head.sentiment.weight", xavier_uniform(hidden, num_sentiments, rng));
  p.sentiment_bias = Param("head.sentiment.bias", Matrix(1, num_sentiments), false);
  p.shift_weight = Param("head.shift.weight", xavier_uniform(2 * hidden, 2, rng));
  p.shift_bias = Param("head.shift.bias", Matrix(1, 2), false);
  return p;
}

void HeadParams::collect(std::vector<Param*>& out) {
  for (Param* p : {&emotion_weight, &emotion_bias, &sentiment_weight, &sentiment_bias, &shift_weight, &shift_bias}) {
    out.push_back(p);
  }
}

HeadOutput linear_softmax_head(Var h, Var weight, Var bias) {
  if (h.cols() != weight.rows()) {
    throw ShapeError("classifier head: features have " + std::to_string(h.cols()) + " columns, weight expects " +
                     std::to_string(weight.rows()));
  }
  HeadOutput out;
  out.logits = add_bias(matmul(h, weight), bias);
  out.probs = softmax_rows(out.logits.value());
  out.preds = argmax_rows(out.probs);
  return out;
}

HeadOutput emotion_head(Var h, HeadParams& params) {
  Tape& t = *h.tape();
  return linear_softmax_head(h, t.param(params.emotion_weight), t.param(params.emotion_bias));
}

HeadOutput sentiment_head(Var h, HeadParams& params) {
  Tape& t = *h.tape();
  return linear_softmax_head(h, t.param(params.sentiment_weight), t.param(params.sentiment_bias));
}

namespace {

Var labeled_loss(const HeadOutput& out, std::span<const int> targets, std::span<const double> weights,
                 const char* task) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0) {
      throw LabelingError(std::string(task) + " loss: utterance " + std::to_string(i) + " is unlabeled");
    }
  }
  return softmax_cross_entropy(out.logits, targets, weights);
}

}  // namespace

Var emotion_loss(const HeadOutput& out, std::span<const int> targets, std::span<const double> class_weights) {
  return labeled_loss(out, targets, class_weights, "emotion");
}

Var sentiment_loss(const HeadOutput& out, std::span<const int> targets, std::span<const double> class_weights) {
  return labeled_loss(out, targets, class_weights, "sentiment");
}

namespace {

void check_lambdas(double lambda_s, double lambda_o, double emotion_weight) {
  if (lambda_s < 0.0 || lambda_o < 0.0 || emotion_weight < 0.0) {
    throw ConfigError("loss trade-off weights must be non-negative (lambda_s=" + std::to_string(lambda_s) +
                      ", lambda_o=" + std::to_string(lambda_o) + ")");
  }
}

}  // namespace

LossReport total_loss(double l_e, double l_s, double l_o, double lambda_s, double lambda_o, double emotion_weight) {
  check_lambdas(lambda_s, lambda_o, emotion_weight);
  LossReport r;
  r.emotion = l_e;
  r.sentiment = l_s;
  r.shift = l_o;
  r.lambda_s = lambda_s;
  r.lambda_o = lambda_o;
  r.total = emotion_weight * l_e + lambda_s * l_s + lambda_o * l_o;
  return r;
}

Var total_loss(Var l_e, Var l_s, Var l_o, double lambda_s, double lambda_o, double emotion_weight) {
  check_lambdas(lambda_s, lambda_o, emotion_weight);
  const std::array<Var, 3> terms{l_e, l_s, l_o};
  const std::array<double, 3> weights{emotion_weight, lambda_s, lambda_o};
  return weighted_sum(terms, weights);
}

}  // namespace graphsmile

#include "graphsmile/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphsmile/error.hpp"

namespace graphsmile {

const Matrix& Var::value() const {
  if (!tape_) throw ContractError("Var: use of an unbound variable");
  return tape_->value(*this);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::param(Param& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.ref = &p.value;
  n.param = &p;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape() != this) throw ContractError("Tape::push: input belongs to a different tape");
    n.needs_grad = n.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const { return nodes_.at(v.id()).value(); }

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id());
  if (n.grad.empty()) return Matrix(n.value().rows(), n.value().cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id()];
  if (!n.needs_grad) return;
  if (n.grad.empty()) {
    if (!g.same_shape(n.value())) throw ShapeError("Tape::accumulate: gradient shape mismatch");
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ContractError("backward: loss belongs to a different tape");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()));
  }
  for (Node& n : nodes_) n.grad = Matrix();
  nodes_[loss.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.param) n.param->grad += n.grad;
    if (n.backward) n.backward(n.grad, *this);
  }
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  Matrix out = matmul(a.value(), b.value());
  return t.push(std::move(out), {a, b}, [a, b](const Matrix& g, Tape& tp) {
    if (tp.needs_grad(a)) tp.accumulate(a, matmul_nt(g, tp.value(b)));
    if (tp.needs_grad(b)) tp.accumulate(b, matmul_tn(tp.value(a), g));
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape();
  Matrix out = a.value() + b.value();
  return t.push(std::move(out), {a, b}, [a, b](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var add_bias(Var x, Var bias) {
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  require(bv.rows() == 1 && bv.cols() == xv.cols(), "add_bias: bias must be 1x" + std::to_string(xv.cols()));
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  return x.tape()->push(std::move(out), {x, bias}, [x, bias](const Matrix& g, Tape& tp) {
    tp.accumulate(x, g);
    if (tp.needs_grad(bias)) {
      Matrix gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      tp.accumulate(bias, gb);
    }
  });
}

Var scale(Var x, double s) {
  return x.tape()->push(x.value() * s, {x}, [x, s](const Matrix& g, Tape& tp) { tp.accumulate(x, g * s); });
}

Matrix leaky_relu(const Matrix& x, double slope) {
  Matrix out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
  return out;
}

Var leaky_relu(Var x, double slope) {
  return x.tape()->push(leaky_relu(x.value(), slope), {x}, [x, slope](const Matrix& g, Tape& tp) {
    const Matrix& xv = tp.value(x);
    Matrix gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= xv[i] > 0.0 ? 1.0 : slope;
    tp.accumulate(x, gx);
  });
}

Var dropout(Var x, double rate, bool training, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw RangeError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const Matrix& xv = x.value();
  Matrix mask(xv.rows(), xv.cols());
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv = 1.0 / (1.0 - rate);
  for (double& m : mask.data()) m = keep(rng) ? inv : 0.0;
  Matrix out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return x.tape()->push(std::move(out), {x}, [x, mask = std::move(mask)](const Matrix& g, Tape& tp) {
    Matrix gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask[i];
    tp.accumulate(x, gx);
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  Matrix out = slice_rows(x.value(), begin, end);
  return x.tape()->push(std::move(out), {x}, [x, begin, end](const Matrix& g, Tape& tp) {
    const Matrix& xv = tp.value(x);
    Matrix gx(xv.rows(), xv.cols());
    std::copy(g.data().begin(), g.data().end(),
              gx.data().begin() + static_cast<std::ptrdiff_t>(begin * xv.cols()));
    (void)end;
    tp.accumulate(x, gx);
  });
}

Var vstack(Var top, Var bottom) {
  Matrix out = vstack(top.value(), bottom.value());
  const std::size_t split = top.rows();
  return top.tape()->push(std::move(out), {top, bottom}, [top, bottom, split](const Matrix& g, Tape& tp) {
    if (tp.needs_grad(top)) tp.accumulate(top, slice_rows(g, 0, split));
    if (tp.needs_grad(bottom)) tp.accumulate(bottom, slice_rows(g, split, g.rows()));
  });
}

Var hstack(Var left, Var right) {
  Matrix out = hstack(left.value(), right.value());
  const std::size_t split = left.cols();
  return left.tape()->push(std::move(out), {left, right}, [left, right, split](const Matrix& g, Tape& tp) {
    Matrix gl(g.rows(), split);
    Matrix gr(g.rows(), g.cols() - split);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < split; ++c) gl(r, c) = g(r, c);
      for (std::size_t c = split; c < g.cols(); ++c) gr(r, c - split) = g(r, c);
    }
    tp.accumulate(left, gl);
    tp.accumulate(right, gr);
  });
}

Var gather_rows(Var x, std::vector<std::size_t> rows) {
  const Matrix& xv = x.value();
  Matrix out(rows.size(), xv.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] < xv.rows(), "gather_rows: row index " + std::to_string(rows[k]) + " out of range");
    std::copy(xv.row(rows[k]).begin(), xv.row(rows[k]).end(), out.row(k).begin());
  }
  return x.tape()->push(std::move(out), {x}, [x, rows = std::move(rows)](const Matrix& g, Tape& tp) {
    const Matrix& xv2 = tp.value(x);
    Matrix gx(xv2.rows(), xv2.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      auto dst = gx.row(rows[k]);
      auto src = g.row(k);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    tp.accumulate(x, gx);
  });
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return out;
}

Var softmax_rows(Var x) {
  return x.tape()->push(softmax_rows(x.value()), {x}, [x](const Matrix& g, Tape& tp) {
    // dx = p * (g - <g, p>) per row; recompute p from x.
    const Matrix p = softmax_rows(tp.value(x));
    Matrix gx(p.rows(), p.cols());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < p.cols(); ++c) dot += g(r, c) * p(r, c);
      for (std::size_t c = 0; c < p.cols(); ++c) gx(r, c) = p(r, c) * (g(r, c) - dot);
    }
    tp.accumulate(x, gx);
  });
}

namespace {

void check_targets(const Matrix& m, std::span<const int> targets, std::span<const double> weights,
                   const char* op) {
  if (targets.size() != m.rows()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(m.rows()) + " rows");
  }
  if (!weights.empty() && weights.size() != m.cols()) {
    throw ShapeError(std::string(op) + ": class weight count does not match class count");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= m.cols()) {
      throw RangeError(std::string(op) + ": target " + std::to_string(t) + " outside [0, " +
                       std::to_string(m.cols()) + ")");
    }
  }
}

double class_weight(std::span<const double> w, int t) { return w.empty() ? 1.0 : w[static_cast<std::size_t>(t)]; }

}  // namespace

Var cross_entropy(Var probs, std::span<const int> targets, std::span<const double> class_weights) {
  const Matrix& p = probs.value();
  check_targets(p, targets, class_weights, "cross_entropy");
  const double n = static_cast<double>(p.rows());
  double loss = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    loss -= class_weight(class_weights, targets[r]) * std::log(p(r, static_cast<std::size_t>(targets[r])));
  }
  if (p.rows() > 0) loss /= n;
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> w(class_weights.begin(), class_weights.end());
  return probs.tape()->push(Matrix(1, 1, loss), {probs},
                            [probs, tg = std::move(tg), w = std::move(w), n](const Matrix& g, Tape& tp) {
                              const Matrix& pv = tp.value(probs);
                              Matrix gp(pv.rows(), pv.cols());
                              for (std::size_t r = 0; r < pv.rows(); ++r) {
                                const auto t = static_cast<std::size_t>(tg[r]);
                                gp(r, t) = -g(0, 0) * class_weight(w, tg[r]) / (n * pv(r, t));
                              }
                              tp.accumulate(probs, gp);
                            });
}

Var softmax_cross_entropy(Var logits, std::span<const int> targets, std::span<const double> class_weights) {
  const Matrix& z = logits.value();
  check_targets(z, targets, class_weights, "softmax_cross_entropy");
  const double n = static_cast<double>(z.rows());
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double log_p = row[static_cast<std::size_t>(targets[r])] - mx - std::log(s);
    loss -= class_weight(class_weights, targets[r]) * log_p;
  }
  if (z.rows() > 0) loss /= n;
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> w(class_weights.begin(), class_weights.end());
  return logits.tape()->push(Matrix(1, 1, loss), {logits},
                             [logits, tg = std::move(tg), w = std::move(w), n](const Matrix& g, Tape& tp) {
                               Matrix gz = softmax_rows(tp.value(logits));
                               for (std::size_t r = 0; r < gz.rows(); ++r) {
                                 gz(r, static_cast<std::size_t>(tg[r])) -= 1.0;
                                 const double k = g(0, 0) * class_weight(w, tg[r]) / n;
                                 for (double& v : gz.row(r)) v *= k;
                               }
                               tp.accumulate(logits, gz);
                             });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape()->push(Matrix(1, 1, s), {x}, [x](const Matrix& g, Tape& tp) {
    const Matrix& xv = tp.value(x);
    tp.accumulate(x, Matrix(xv.rows(), xv.cols(), g(0, 0)));
  });
}

Var sum_squares(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v * v;
  return x.tape()->push(Matrix(1, 1, s), {x},
                        [x](const Matrix& g, Tape& tp) { tp.accumulate(x, tp.value(x) * (2.0 * g(0, 0))); });
}

Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.empty() || scalars.size() != weights.size()) {
    throw ShapeError("weighted_sum: need one weight per scalar");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    const Matrix& v = scalars[k].value();
    require(v.rows() == 1 && v.cols() == 1, "weighted_sum: inputs must be 1x1");
    s += weights[k] * v(0, 0);
  }
  std::vector<Var> in(scalars.begin(), scalars.end());
  std::vector<double> w(weights.begin(), weights.end());
  return scalars[0].tape()->push(Matrix(1, 1, s), scalars, [in, w](const Matrix& g, Tape& tp) {
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (w[k] != 0.0) tp.accumulate(in[k], Matrix(1, 1, w[k] * g(0, 0)));
    }
  });
}

Var fc_layer(Var x, Var theta, Var bias, double slope, double rate, bool training, std::mt19937_64& rng) {
  return dropout(leaky_relu(add_bias(matmul(x, theta), bias), slope), rate, training, rng);
}

std::vector<int> argmax_rows(const Matrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    // max_element returns the first maximum: ties break to the lowest index.
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace graphsmile

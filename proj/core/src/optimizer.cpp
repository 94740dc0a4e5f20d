#include "graphsmile/optimizer.hpp"

#include <cmath>

#include "graphsmile/error.hpp"

namespace graphsmile {

AdamW::AdamW(std::vector<Param*> params, AdamWOptions options) : params_(std::move(params)), opt_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    if (!p->grad.same_shape(p->value)) throw ShapeError("AdamW: gradient shape differs for " + p->name);
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void AdamW::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    Matrix& m = m_[k];
    Matrix& v = v_[k];
    const double wd = p.decay ? opt_.weight_decay : 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      const double old = p.value[i];
      p.value[i] = old - opt_.lr * (mhat / (std::sqrt(vhat) + opt_.eps)) - opt_.lr * wd * old;
    }
  }
}

void AdamW::zero_grad() {
  for (Param* p : params_) p->grad.fill(0.0);
}

double weight_decay_term(const std::vector<Param*>& params, double beta) {
  double sq = 0.0;
  for (const Param* p : params) {
    if (!p->decay) continue;
    for (double x : p->value.data()) sq += x * x;
  }
  return beta * std::sqrt(sq);
}

}  // namespace graphsmile

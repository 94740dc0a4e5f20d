#pragma once

#include <cstdint>
#include <vector>

#include "graphsmile/autograd.hpp"

namespace graphsmile {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
};

/// Adam with decoupled weight decay:
///   value <- value - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * value
/// Params with `decay == false` skip the last term.
class AdamW {
 public:
  AdamW(std::vector<Param*> params, AdamWOptions options);

  void step();
  void zero_grad();

  std::int64_t steps() const noexcept { return t_; }
  const AdamWOptions& options() const noexcept { return opt_; }
  const std::vector<Param*>& params() const noexcept { return params_; }

 private:
  std::vector<Param*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamWOptions opt_;
  std::int64_t t_ = 0;
};

/// beta * ||theta|| over every decayed parameter, the bookkeeping value of
/// the regulariser that AdamW applies implicitly.
double weight_decay_term(const std::vector<Param*>& params, double beta);

}  // namespace graphsmile

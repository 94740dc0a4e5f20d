#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "graphsmile/autograd.hpp"

namespace graphsmile {

/// Builds a scalar loss on the given tape. Must be deterministic: the
/// checker evaluates it many times with perturbed parameters.
using LossClosure = std::function<Var(Tape&)>;

struct GradCheckReport {
  bool passed = true;
  double max_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t failures = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central-difference check of every coordinate of `params`. The error is
/// |a - n| / max(|a|, |n|), or the plain |a - n| for entries whose analytic
/// gradient is below `abs_floor` in magnitude. Parameter gradients are left
/// holding the analytic values.
GradCheckReport grad_check(const LossClosure& loss, const std::vector<Param*>& params, double h = 1e-5,
                           double tol = 1e-4, double abs_floor = 1e-8);

}  // namespace graphsmile

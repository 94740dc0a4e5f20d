#include "graphsmile/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace graphsmile {

namespace {

double evaluate(const LossClosure& loss) {
  Tape tape;
  return loss(tape).value()(0, 0);
}

}  // namespace

GradCheckReport grad_check(const LossClosure& loss, const std::vector<Param*>& params, double h, double tol,
                           double abs_floor) {
  for (Param* p : params) p->zero_grad();
  {
    Tape tape;
    Var l = loss(tape);
    tape.backward(l);
  }

  GradCheckReport report;
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      const double up = evaluate(loss);
      p->value[i] = orig - h;
      const double down = evaluate(loss);
      p->value[i] = orig;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[i];
      const double diff = std::abs(analytic - numeric);
      const double err =
          std::abs(analytic) < abs_floor ? diff : diff / std::max(std::abs(analytic), std::abs(numeric));
      ++report.coordinates;
      if (err > tol) ++report.failures;
      if (err > report.max_error || report.coordinates == 1) {
        report.max_error = err;
        report.worst_param = p->name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.failures == 0;
  return report;
}

}  // namespace graphsmile

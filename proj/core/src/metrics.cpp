#include "graphsmile/metrics.hpp"

#include <numeric>
#include <string>

#include "graphsmile/error.hpp"

namespace graphsmile {

std::size_t EvalReport::support(std::size_t c) const {
  return std::accumulate(confusion[c].begin(), confusion[c].end(), std::size_t{0});
}

EvalReport compute_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t num_classes) {
  if (truth.size() != pred.size()) {
    throw ShapeError("compute_metrics: " + std::to_string(truth.size()) + " labels, " + std::to_string(pred.size()) +
                     " predictions");
  }
  EvalReport r;
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0) {
      ++r.excluded;
      continue;
    }
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(pred[i]);
    if (t >= num_classes || pred[i] < 0 || p >= num_classes) throw RangeError("compute_metrics: class out of range");
    ++r.confusion[t][p];
    ++r.total;
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < num_classes; ++c) correct += r.confusion[c][c];
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(r.total);

  r.per_class_f1.assign(num_classes, 0.0);
  double weighted = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < num_classes; ++t) predicted += r.confusion[t][c];
    const std::size_t support = r.support(c);
    const std::size_t tp = r.confusion[c][c];
    const double precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    const double recall = support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(support);
    const double pr = precision + recall;
    r.per_class_f1[c] = pr == 0.0 ? 0.0 : 2.0 * precision * recall / pr;
    weighted += static_cast<double>(support) * r.per_class_f1[c];
  }
  r.weighted_f1 = r.total == 0 ? 0.0 : weighted / static_cast<double>(r.total);
  return r;
}

}  // namespace graphsmile

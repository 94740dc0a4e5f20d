#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace graphsmile {

struct EvalReport {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::vector<double> per_class_f1;
  /// confusion[truth][pred]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t total = 0;
  /// Utterances without a label for the evaluated task.
  std::size_t excluded = 0;
  std::size_t epoch = 0;
  double seconds = 0.0;

  std::size_t support(std::size_t c) const;
};

/// Entries with truth < 0 are skipped and counted in `excluded`. Classes
/// with no support and no predictions score F1 = 0 with weight 0.
EvalReport compute_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t num_classes);

}  // namespace graphsmile

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "graphsmile/autograd.hpp"
#include "graphsmile/data_model.hpp"

namespace graphsmile {

inline constexpr std::size_t kShiftClasses = 2;

/// Half-open utterance range [begin, end).
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Consecutive blocks of `block` utterances; the last one holds the
/// remainder. block >= M gives a single segment.
std::vector<Segment> segment_dialogue(std::size_t num_utterances, std::size_t block);

/// Per-utterance sentiment indices; throws LabelingError naming the first
/// utterance without one.
std::vector<int> dialogue_sentiments(const Dialogue& d);

/// Row-major b x b matrix: label(i, j) = 1 iff sentiment i != sentiment j,
/// for i, j inside the segment. Negative entries mean "missing".
std::vector<int> make_shift_labels(std::span<const int> sentiments, Segment segment);

/// Pairwise shift samples of one dialogue. Row k is concat(h_i, h_j) for
/// pairs[k] = (i, j); pairs are emitted segment by segment, i outer, j inner.
struct ShiftBatch {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> segment_of;
  std::vector<int> labels;
  Var features;  // K x 2D

  std::size_t size() const noexcept { return pairs.size(); }
};

ShiftBatch build_shift_features(Var h, std::span<const Segment> segments, std::span<const int> sentiments);

struct ShiftOutput {
  Var logits;   // K x 2
  Matrix probs; // softmax(logits)
  std::vector<int> preds;
};

/// softmax(T * theta_z + b_z) with argmax predictions.
ShiftOutput shift_forward(const ShiftBatch& batch, Var theta_z, Var bias_z);

/// Inverse-frequency weights over the two shift classes of one batch.
std::vector<double> shift_class_weights(std::span<const int> labels);

/// Mean cross-entropy over all K pairs.
Var shift_loss(const ShiftOutput& out, std::span<const int> labels, std::span<const double> class_weights = {});

}  // namespace graphsmile

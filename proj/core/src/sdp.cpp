#include "graphsmile/sdp.hpp"

#include <algorithm>
#include <string>

#include "graphsmile/error.hpp"

namespace graphsmile {

std::vector<Segment> segment_dialogue(std::size_t num_utterances, std::size_t block) {
  if (block < 1) throw ConfigError("segment size must be >= 1");
  std::vector<Segment> out;
  for (std::size_t b = 0; b < num_utterances; b += block) out.push_back({b, std::min(num_utterances, b + block)});
  return out;
}

std::vector<int> dialogue_sentiments(const Dialogue& d) {
  std::vector<int> s;
  s.reserve(d.size());
  for (const auto& u : d.utterances) {
    if (!u.sentiment) throw LabelingError("dialogue " + d.id + ", utterance " + u.id + ": no sentiment label");
    s.push_back(*u.sentiment);
  }
  return s;
}

std::vector<int> make_shift_labels(std::span<const int> sentiments, Segment segment) {
  if (segment.end > sentiments.size() || segment.begin > segment.end) {
    throw ShapeError("make_shift_labels: segment outside the dialogue");
  }
  for (std::size_t i = segment.begin; i < segment.end; ++i) {
    if (sentiments[i] < 0) throw LabelingError("utterance " + std::to_string(i) + " has no sentiment label");
  }
  const std::size_t b = segment.size();
  std::vector<int> labels(b * b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      labels[i * b + j] = sentiments[segment.begin + i] != sentiments[segment.begin + j] ? 1 : 0;
  return labels;
}

ShiftBatch build_shift_features(Var h, std::span<const Segment> segments, std::span<const int> sentiments) {
  if (sentiments.size() != h.rows()) {
    throw ShapeError("build_shift_features: " + std::to_string(sentiments.size()) + " sentiments for " +
                     std::to_string(h.rows()) + " utterances");
  }
  ShiftBatch batch;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const auto labels = make_shift_labels(sentiments, seg);
    const std::size_t b = seg.size();
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        batch.pairs.emplace_back(seg.begin + i, seg.begin + j);
        batch.segment_of.push_back(s);
        batch.labels.push_back(labels[i * b + j]);
        left.push_back(seg.begin + i);
        right.push_back(seg.begin + j);
      }
    }
  }
  batch.features = hstack(gather_rows(h, std::move(left)), gather_rows(h, std::move(right)));
  return batch;
}

ShiftOutput shift_forward(const ShiftBatch& batch, Var theta_z, Var bias_z) {
  if (theta_z.rows() != batch.features.cols() || theta_z.cols() != kShiftClasses) {
    throw ShapeError("shift_forward: classifier must be " + std::to_string(batch.features.cols()) + "x2");
  }
  ShiftOutput out;
  out.logits = add_bias(matmul(batch.features, theta_z), bias_z);
  out.probs = softmax_rows(out.logits.value());
  out.preds = argmax_rows(out.probs);
  return out;
}

std::vector<double> shift_class_weights(std::span<const int> labels) {
  std::vector<double> counts(kShiftClasses, 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  std::vector<double> w(kShiftClasses, 1.0);
  if (counts[0] == 0.0 || counts[1] == 0.0) return w;
  for (std::size_t c = 0; c < kShiftClasses; ++c)
    w[c] = static_cast<double>(labels.size()) / (kShiftClasses * counts[c]);
  return w;
}

Var shift_loss(const ShiftOutput& out, std::span<const int> labels, std::span<const double> class_weights) {
  return softmax_cross_entropy(out.logits, labels, class_weights);
}

}  // namespace graphsmile

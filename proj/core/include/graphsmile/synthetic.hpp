#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "graphsmile/data_model.hpp"
#include "graphsmile/matrix.hpp"

namespace graphsmile {

/// Knobs for the synthetic dialogue generator. Features of modality m are
///   signal_strength * split[m] * prototype(emotion, m) + N(0, I)
/// with unit-norm prototypes fixed by `seed`.
struct SynthConfig {
  std::size_t num_dialogues = 40;
  std::size_t utterances_per_dialogue = 12;
  FeatureDims dims{16, 16, 16};
  std::size_t num_emotions = 4;
  double signal_strength = 3.0;
  std::array<double, 3> modality_signal_split{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  /// Probability that an utterance's sentiment differs from its predecessor's.
  double shift_rate = 0.2;
  std::uint64_t seed = 0;
  /// Dialogue i of the output uses substream (seed, first_dialogue_index + i),
  /// so disjoint index ranges give independent draws from one generator.
  std::size_t first_dialogue_index = 0;

  void validate() const;
};

/// Emotions "E0".."E{n-1}"; emotion k merges into sentiment k mod 3.
LabelScheme synthetic_scheme(std::size_t num_emotions);

/// Row-stochastic emotion transition matrix: stay with probability
/// 1 - shift_rate, otherwise jump to an emotion of another sentiment.
/// The jump part is doubly stochastic, so the stationary distribution is
/// uniform whenever no sentiment owns more than half the emotions.
Matrix emotion_transition_matrix(const LabelScheme& scheme, double shift_rate);

Dataset generate(const SynthConfig& cfg, const LabelScheme& scheme);

}  // namespace graphsmile

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "graphsmile/autograd.hpp"
#include "graphsmile/config.hpp"
#include "graphsmile/data_model.hpp"
#include "graphsmile/dialogue_graph.hpp"
#include "graphsmile/gsf.hpp"
#include "graphsmile/heads.hpp"
#include "graphsmile/sdp.hpp"

namespace graphsmile {

struct ModelShape {
  FeatureDims dims;
  std::size_t num_emotions = 0;
  std::size_t num_sentiments = 0;
  std::size_t dim = 0;
  std::size_t hidden = 0;
  std::size_t depth = 0;
  Window window;
};

ModelShape model_shape(const Dataset& ds, const RunConfig& cfg);

/// Every trainable tensor of the full pipeline.
struct ModelParams {
  ProjectionSet projection;
  std::array<GsfStack, 3> stacks;      // indexed by ModalityPair
  std::array<Param, 3> edge_weights;   // indexed by ModalityPair
  Param theta_h;
  HeadParams heads;

  static ModelParams create(const ModelShape& shape, std::uint64_t seed);
  /// Stable order: projection, then per pair (edge weights, stack), theta_h, heads.
  std::vector<Param*> all();
  std::vector<const Param*> all() const;
};

/// Per-utterance targets with -1 for a missing label.
struct DialogueTargets {
  std::vector<int> emotion;
  std::vector<int> sentiment;
};

DialogueTargets dialogue_targets(const Dialogue& d);

struct LossOptions {
  std::span<const double> emotion_class_weights;
  bool shift_class_weights = false;
  /// Inference can skip the pairwise shift block entirely.
  bool with_shift = true;
};

struct DialogueForward {
  Var h;                      // M x D_h
  HeadOutput emotion;
  HeadOutput sentiment;
  std::optional<ShiftBatch> shift_batch;
  std::optional<ShiftOutput> shift;
  std::vector<Segment> segments;
  Var l_e;
  Var l_s;
  Var l_o;
  Var loss;                   // 1x1 L_total
  LossReport report;
};

/// Full pipeline on one dialogue: projection, the active bimodal graphs with
/// their GSF stacks, integration, the three heads and the combined loss.
/// Loss terms with no labeled rows are constant zero.
DialogueForward forward_dialogue(Tape& tape, const Dialogue& d, ModelParams& params, const RunConfig& cfg,
                                 bool training, std::mt19937_64& rng, const LossOptions& loss_options = {});

/// Which modalities stay after drop_* ablations, in t, v, a order.
std::vector<Modality> active_modalities(const RunConfig& cfg);
std::vector<ModalityPair> active_pairs(const RunConfig& cfg);
ResidualMode residual_mode(const RunConfig& cfg);

}  // namespace graphsmile

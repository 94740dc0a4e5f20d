#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "graphsmile/autograd.hpp"
#include "graphsmile/data_model.hpp"

namespace graphsmile {

enum class ModalityPair : int { TV = 0, TA = 1, VA = 2 };

inline constexpr std::array<ModalityPair, 3> kModalityPairs = {ModalityPair::TV, ModalityPair::TA, ModalityPair::VA};

std::pair<Modality, Modality> pair_modalities(ModalityPair p);
std::string_view pair_tag(ModalityPair p);
bool pair_touches(ModalityPair p, Modality m);

/// Past / future context window, counted in utterances.
struct Window {
  std::size_t past = 0;
  std::size_t future = 0;

  std::size_t span() const noexcept { return past + future + 1; }
};

/// Directed edge between node indices. Nodes 0..M-1 belong to the pair's
/// first modality, M..2M-1 to the second.
struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::size_t weight_slot = 0;  // flat index into the pair's edge-weight Param
};

/// Windowed bipartite dialogue graph for one modality pair. Node i (either
/// modality) receives edges from the other modality's utterances
/// max(0, i-P) .. min(M-1, i+F), the same utterance included.
struct BimodalGraph {
  std::size_t num_utterances = 0;
  Window window;
  ModalityPair pair = ModalityPair::TV;
  std::vector<GraphEdge> edges;

  std::size_t num_nodes() const noexcept { return 2 * num_utterances; }
  std::size_t utterance_of(std::size_t node) const noexcept {
    return node < num_utterances ? node : node - num_utterances;
  }
  bool in_first_modality(std::size_t node) const noexcept { return node < num_utterances; }
  /// dst utterance minus src utterance.
  long offset(const GraphEdge& e) const noexcept {
    return static_cast<long>(utterance_of(e.dst)) - static_cast<long>(utterance_of(e.src));
  }
};

/// Edge weights are shared across dialogues by (direction, offset): row 0
/// holds edges whose source is in the first modality, row 1 the reverse;
/// column = offset + F. Offsets span [-F, P].
std::size_t edge_weight_slot(bool src_in_first_modality, long offset, Window window);
/// 2 x (P+F+1) weights initialised to 1, exempt from weight decay.
Param make_edge_weights(ModalityPair pair, Window window);

BimodalGraph build_bimodal_graph(std::size_t num_utterances, Window window, ModalityPair pair);
std::array<BimodalGraph, 3> build_all_graphs(std::size_t num_utterances, Window window);

/// Per-edge multiplier: 1, or 1/sqrt(deg(dst) * deg(src)) over edge counts
/// when `normalize` is set. Either way the diagonal blocks stay zero.
std::vector<double> edge_coefficients(const BimodalGraph& g, bool normalize);

/// Dense 2M x 2M matrix with A[dst][src] = weight of edge src -> dst.
Matrix assemble_adjacency(const BimodalGraph& g, const Matrix& weights, bool normalize = false);
/// Differentiable version; gradients flow back into the weight Param.
Var assemble_adjacency(const BimodalGraph& g, Var weights, bool normalize = false);

}  // namespace graphsmile

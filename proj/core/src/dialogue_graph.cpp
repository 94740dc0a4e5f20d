#include "graphsmile/dialogue_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphsmile/error.hpp"

namespace graphsmile {

std::pair<Modality, Modality> pair_modalities(ModalityPair p) {
  switch (p) {
    case ModalityPair::TV: return {Modality::Text, Modality::Visual};
    case ModalityPair::TA: return {Modality::Text, Modality::Acoustic};
    case ModalityPair::VA: return {Modality::Visual, Modality::Acoustic};
  }
  return {Modality::Text, Modality::Visual};
}

std::string_view pair_tag(ModalityPair p) {
  switch (p) {
    case ModalityPair::TV: return "tv";
    case ModalityPair::TA: return "ta";
    case ModalityPair::VA: return "va";
  }
  return "??";
}

bool pair_touches(ModalityPair p, Modality m) {
  auto [a, b] = pair_modalities(p);
  return a == m || b == m;
}

std::size_t edge_weight_slot(bool src_in_first_modality, long offset, Window window) {
  const long lo = -static_cast<long>(window.future);
  const long hi = static_cast<long>(window.past);
  if (offset < lo || offset > hi) {
    throw ContractError("edge offset " + std::to_string(offset) + " outside window [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
  const std::size_t row = src_in_first_modality ? 0 : 1;
  return row * window.span() + static_cast<std::size_t>(offset - lo);
}

Param make_edge_weights(ModalityPair pair, Window window) {
  return Param("edge." + std::string(pair_tag(pair)), Matrix(2, window.span(), 1.0), /*apply_decay=*/false);
}

BimodalGraph build_bimodal_graph(std::size_t num_utterances, Window window, ModalityPair pair) {
  if (num_utterances < 1) throw ContractError("build_bimodal_graph: dialogue needs at least one utterance");
  BimodalGraph g;
  g.num_utterances = num_utterances;
  g.window = window;
  g.pair = pair;
  const std::size_t m = num_utterances;
  for (std::size_t dst = 0; dst < 2 * m; ++dst) {
    const std::size_t i = dst < m ? dst : dst - m;
    const bool dst_first = dst < m;
    const std::size_t lo = i >= window.past ? i - window.past : 0;
    const std::size_t hi = std::min(m - 1, i + window.future);
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t src = dst_first ? m + j : j;
      const long off = static_cast<long>(i) - static_cast<long>(j);
      g.edges.push_back({src, dst, edge_weight_slot(!dst_first, off, window)});
    }
  }
  return g;
}

std::array<BimodalGraph, 3> build_all_graphs(std::size_t num_utterances, Window window) {
  return {build_bimodal_graph(num_utterances, window, ModalityPair::TV),
          build_bimodal_graph(num_utterances, window, ModalityPair::TA),
          build_bimodal_graph(num_utterances, window, ModalityPair::VA)};
}

std::vector<double> edge_coefficients(const BimodalGraph& g, bool normalize) {
  std::vector<double> coef(g.edges.size(), 1.0);
  if (!normalize) return coef;
  std::vector<double> in_deg(g.num_nodes(), 0.0);
  std::vector<double> out_deg(g.num_nodes(), 0.0);
  for (const auto& e : g.edges) {
    in_deg[e.dst] += 1.0;
    out_deg[e.src] += 1.0;
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    coef[k] = 1.0 / std::sqrt(in_deg[g.edges[k].dst] * out_deg[g.edges[k].src]);
  }
  return coef;
}

namespace {

void check_weights(const BimodalGraph& g, const Matrix& w) {
  if (w.rows() != 2 || w.cols() != g.window.span()) {
    throw ShapeError("assemble_adjacency: edge weights must be 2x" + std::to_string(g.window.span()));
  }
}

}  // namespace

Matrix assemble_adjacency(const BimodalGraph& g, const Matrix& weights, bool normalize) {
  check_weights(g, weights);
  const auto coef = edge_coefficients(g, normalize);
  Matrix a(g.num_nodes(), g.num_nodes());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    a(e.dst, e.src) = coef[k] * weights[e.weight_slot];
  }
  return a;
}

Var assemble_adjacency(const BimodalGraph& g, Var weights, bool normalize) {
  Matrix a = assemble_adjacency(g, weights.value(), normalize);
  auto coef = edge_coefficients(g, normalize);
  return weights.tape()->push(std::move(a), {weights},
                              [weights, edges = g.edges, coef = std::move(coef)](const Matrix& grad, Tape& tp) {
                                const Matrix& wv = tp.value(weights);
                                Matrix gw(wv.rows(), wv.cols());
                                for (std::size_t k = 0; k < edges.size(); ++k) {
                                  gw[edges[k].weight_slot] += coef[k] * grad(edges[k].dst, edges[k].src);
                                }
                                tp.accumulate(weights, gw);
                              });
}

}  // namespace graphsmile

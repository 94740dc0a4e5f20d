#pragma once

#include <array>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphsmile/autograd.hpp"
#include "graphsmile/data_model.hpp"

namespace graphsmile {

/// Which parts of the residual combination are active.
///   Full    : X0 + sum_l FC_l(X_l)
///   NoRes   : FC_L(X_L) only
///   NoFcRes : X0 + sum_l X_l (FC replaced by identity)
enum class ResidualMode { Full, NoRes, NoFcRes };

/// Xavier-uniform D_in x D_out matrix.
Matrix xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// One graph-structure-fusion stack: L propagation matrices plus one FC
/// (weight, bias) per layer for the residual sum.
struct GsfStack {
  std::vector<Param> thetas;
  std::vector<Param> fc_weights;
  std::vector<Param> fc_biases;

  static GsfStack create(const std::string& prefix, std::size_t depth, std::size_t dim, std::mt19937_64& rng);
  std::size_t depth() const noexcept { return thetas.size(); }
  void collect(std::vector<Param*>& out);
};

struct GsfOptions {
  double slope = 0.01;
  double dropout = 0.0;
  ResidualMode residual = ResidualMode::Full;
};

struct GsfOutput {
  Var output;
  std::vector<Var> layers;  // X^(0) .. X^(L)
};

/// X_out = A * X * theta. No nonlinearity.
Var sgc_layer(Var adjacency, Var x, Var theta);

GsfOutput gsf_forward(Var adjacency, Var x0, GsfStack& stack, const GsfOptions& options, bool training,
                      std::mt19937_64& rng);

/// Rows 0..M-1 (first modality, enriched by the second) and M..2M-1.
std::pair<Var, Var> split_pair_output(Var x);

/// Per-modality affine maps d_m -> D.
struct ProjectionSet {
  std::array<Param, 3> weights;
  std::array<Param, 3> biases;

  static ProjectionSet create(const FeatureDims& dims, std::size_t dim, std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);
};

/// M x d_m matrix of one modality's raw features.
Matrix feature_matrix(const Dialogue& d, Modality m);

std::array<Var, 3> project_inputs(Tape& tape, const std::array<Matrix, 3>& features, ProjectionSet& proj);

struct FusedRepresentation {
  Var h;
  std::vector<Var> components;
};

/// H = sum_k LeakyReLU(components[k] * theta_h), one shared bias-free theta_h.
FusedRepresentation integrate_modalities(std::span<const Var> components, Var theta_h, double slope);

}  // namespace graphsmile

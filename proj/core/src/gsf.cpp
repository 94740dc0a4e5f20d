#include "graphsmile/gsf.hpp"

#include <cmath>

#include "graphsmile/error.hpp"

namespace graphsmile {

Matrix xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = dist(rng);
  return m;
}

GsfStack GsfStack::create(const std::string& prefix, std::size_t depth, std::size_t dim, std::mt19937_64& rng) {
  if (depth < 1) throw ConfigError("GSF depth must be >= 1");
  GsfStack s;
  for (std::size_t l = 1; l <= depth; ++l) {
    const std::string tag = prefix + ".layer" + std::to_string(l);
    s.thetas.emplace_back(tag + ".theta", xavier_uniform(dim, dim, rng));
    s.fc_weights.emplace_back(tag + ".fc.weight", xavier_uniform(dim, dim, rng));
    s.fc_biases.emplace_back(tag + ".fc.bias", Matrix(1, dim), /*apply_decay=*/false);
  }
  return s;
}

void GsfStack::collect(std::vector<Param*>& out) {
  for (std::size_t l = 0; l < thetas.size(); ++l) {
    out.push_back(&thetas[l]);
    out.push_back(&fc_weights[l]);
    out.push_back(&fc_biases[l]);
  }
}

Var sgc_layer(Var adjacency, Var x, Var theta) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n || x.rows() != n || theta.rows() != x.cols()) {
    throw ShapeError("sgc_layer: adjacency " + std::to_string(adjacency.rows()) + "x" +
                     std::to_string(adjacency.cols()) + ", features " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", theta " + std::to_string(theta.rows()) + "x" +
                     std::to_string(theta.cols()));
  }
  return matmul(matmul(adjacency, x), theta);
}

GsfOutput gsf_forward(Var adjacency, Var x0, GsfStack& stack, const GsfOptions& options, bool training,
                      std::mt19937_64& rng) {
  if (stack.depth() < 1) throw ConfigError("gsf_forward: stack has no layers");
  Tape& tape = *x0.tape();
  GsfOutput out;
  out.layers.push_back(x0);
  Var x = x0;
  for (std::size_t l = 0; l < stack.depth(); ++l) {
    x = sgc_layer(adjacency, x, tape.param(stack.thetas[l]));
    out.layers.push_back(x);
  }

  auto fc = [&](std::size_t l) {
    return fc_layer(out.layers[l + 1], tape.param(stack.fc_weights[l]), tape.param(stack.fc_biases[l]),
                    options.slope, options.dropout, training, rng);
  };

  switch (options.residual) {
    case ResidualMode::NoRes:
      out.output = fc(stack.depth() - 1);
      break;
    case ResidualMode::NoFcRes: {
      Var acc = x0;
      for (std::size_t l = 1; l < out.layers.size(); ++l) acc = add(acc, out.layers[l]);
      out.output = acc;
      break;
    }
    case ResidualMode::Full: {
      Var acc = x0;
      for (std::size_t l = 0; l < stack.depth(); ++l) acc = add(acc, fc(l));
      out.output = acc;
      break;
    }
  }
  return out;
}

std::pair<Var, Var> split_pair_output(Var x) {
  if (x.rows() % 2 != 0) throw ShapeError("split_pair_output: odd row count " + std::to_string(x.rows()));
  const std::size_t m = x.rows() / 2;
  return {slice_rows(x, 0, m), slice_rows(x, m, 2 * m)};
}

ProjectionSet ProjectionSet::create(const FeatureDims& dims, std::size_t dim, std::mt19937_64& rng) {
  ProjectionSet p;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(m);
    const std::string tag = std::string("proj.") + modality_tag(m);
    p.weights[i] = Param(tag + ".weight", xavier_uniform(dims.of(m), dim, rng));
    p.biases[i] = Param(tag + ".bias", Matrix(1, dim), /*apply_decay=*/false);
  }
  return p;
}

void ProjectionSet::collect(std::vector<Param*>& out) {
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
}

Matrix feature_matrix(const Dialogue& d, Modality m) {
  const std::size_t dim = d.utterances.empty() ? 0 : d.utterances.front().features(m).size();
  Matrix out(d.size(), dim);
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto& f = d.utterances[r].features(m);
    if (f.size() != dim) throw ShapeError("feature_matrix: ragged features in dialogue " + d.id);
    std::copy(f.begin(), f.end(), out.row(r).begin());
  }
  return out;
}

std::array<Var, 3> project_inputs(Tape& tape, const std::array<Matrix, 3>& features, ProjectionSet& proj) {
  std::array<Var, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix& w = proj.weights[i].value;
    if (features[i].cols() != w.rows()) {
      throw ShapeError("project_inputs: modality " + std::string(1, modality_tag(static_cast<Modality>(i))) +
                       " has dimension " + std::to_string(features[i].cols()) + ", projection expects " +
                       std::to_string(w.rows()));
    }
    out[i] = add_bias(matmul(tape.constant(features[i]), tape.param(proj.weights[i])), tape.param(proj.biases[i]));
  }
  return out;
}

FusedRepresentation integrate_modalities(std::span<const Var> components, Var theta_h, double slope) {
  if (components.empty()) throw ContractError("integrate_modalities: no components");
  FusedRepresentation fused;
  fused.components.assign(components.begin(), components.end());
  const std::size_t rows = components.front().rows();
  Var h;
  for (const Var& c : components) {
    if (c.rows() != rows || c.cols() != theta_h.rows()) throw ShapeError("integrate_modalities: shape mismatch");
    Var term = leaky_relu(matmul(c, theta_h), slope);
    h = h.valid() ? add(h, term) : term;
  }
  fused.h = h;
  return fused;
}

}  // namespace graphsmile

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphsmile/matrix.hpp"

namespace graphsmile {

/// A trainable tensor. `decay` marks whether decoupled weight decay applies
/// (biases and edge weights are exempt).
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;

  Param() = default;
  Param(std::string n, Matrix v, bool apply_decay = true)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), decay(apply_decay) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records a computation graph in creation order; `backward` walks it in
/// reverse. One tape per forward pass (per dialogue).
class Tape {
 public:
  /// Receives the node's upstream gradient and pushes contributions into
  /// the node's inputs through `accumulate`.
  using BackwardFn = std::function<void(const Matrix& upstream, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a parameter. Registering the same Param twice returns the
  /// same node. The Param must outlive the tape.
  Var param(Param& p);

  /// Appends an interior node. `inputs` decide whether it needs a gradient.
  Var push(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var push(Matrix value, std::span<const Var> inputs, BackwardFn backward);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward() target w.r.t. v (zeros if unreached).
  Matrix grad(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }

  void accumulate(Var v, const Matrix& g);

  /// Reverse-mode sweep from a 1x1 loss. Node gradients are reset per call;
  /// parameter gradients accumulate across calls until zeroed.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* ref = nullptr;
    Matrix grad;
    BackwardFn backward;
    Param* param = nullptr;
    bool needs_grad = false;
    const Matrix& value() const { return ref ? *ref : owned; }
  };
  std::deque<Node> nodes_;
  std::unordered_map<const Param*, std::size_t> param_nodes_;
};

// Differentiable operations. Gradients follow the usual contracts, e.g. for
// C = A*B with upstream G: dA = G*B^T, dB = A^T*G.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var add_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
Var scale(Var x, double s);
Var leaky_relu(Var x, double slope);
/// Inverted dropout: survivors are scaled by 1/(1-rate); identity when not
/// training or when rate == 0.
Var dropout(Var x, double rate, bool training, std::mt19937_64& rng);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var vstack(Var top, Var bottom);
Var hstack(Var left, Var right);
Var gather_rows(Var x, std::vector<std::size_t> rows);
Var softmax_rows(Var x);
/// Mean over rows of -w[t] * log p[row, t]. Operates on probabilities.
Var cross_entropy(Var probs, std::span<const int> targets, std::span<const double> class_weights = {});
/// Same value as cross_entropy(softmax_rows(logits), ...) through the
/// log-sum-exp path.
Var softmax_cross_entropy(Var logits, std::span<const int> targets,
                          std::span<const double> class_weights = {});
Var sum(Var x);
Var sum_squares(Var x);
/// sum_k weights[k] * scalars[k]; every scalar must be 1x1.
Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

/// Dropout(LeakyReLU(x * theta + bias)).
Var fc_layer(Var x, Var theta, Var bias, double slope, double rate, bool training,
             std::mt19937_64& rng);

// Non-differentiable helpers on plain matrices.
Matrix softmax_rows(const Matrix& x);
Matrix leaky_relu(const Matrix& x, double slope);
std::vector<int> argmax_rows(const Matrix& x);

}  // namespace graphsmile

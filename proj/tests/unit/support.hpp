#pragma once

#include <random>
#include <string>
#include <vector>

#include "graphsmile/autograd.hpp"
#include "graphsmile/data_model.hpp"
#include "graphsmile/matrix.hpp"

namespace testing_support {

using graphsmile::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (double& x : m.data()) x = d(rng);
  return m;
}

/// Naive triple loop, the reference for every product in the tests.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

/// Dialogue with random features and the given emotion sequence.
inline graphsmile::Dialogue make_dialogue(const std::string& id, const std::vector<int>& emotions,
                                          const graphsmile::LabelScheme& scheme, graphsmile::FeatureDims dims,
                                          std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  graphsmile::Dialogue d;
  d.id = id;
  for (std::size_t i = 0; i < emotions.size(); ++i) {
    graphsmile::Utterance u;
    u.id = id + "_u" + std::to_string(i);
    for (std::size_t k = 0; k < dims.text; ++k) u.text.push_back(n(rng));
    for (std::size_t k = 0; k < dims.visual; ++k) u.visual.push_back(n(rng));
    for (std::size_t k = 0; k < dims.acoustic; ++k) u.acoustic.push_back(n(rng));
    u.emotion = emotions[i];
    graphsmile::derive_labels(u, scheme);
    d.utterances.push_back(std::move(u));
  }
  return d;
}

/// Metrics recomputed straight from the label lists, one class at a time.
struct MetricOracle {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::vector<double> f1;
  std::size_t total = 0;
  std::size_t excluded = 0;
};

inline MetricOracle metric_oracle(const std::vector<int>& truth, const std::vector<int>& pred, std::size_t classes) {
  MetricOracle o;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0) {
      ++o.excluded;
      continue;
    }
    ++o.total;
    if (truth[i] == pred[i]) ++correct;
  }
  o.accuracy = o.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(o.total);
  double weighted = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const int k = static_cast<int>(c);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] < 0) continue;
      if (truth[i] == k && pred[i] == k) ++tp;
      if (truth[i] != k && pred[i] == k) ++fp;
      if (truth[i] == k && pred[i] != k) ++fn;
    }
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    o.f1.push_back(f);
    weighted += static_cast<double>(tp + fn) * f;
  }
  o.weighted_f1 = o.total == 0 ? 0.0 : weighted / static_cast<double>(o.total);
  return o;
}

}  // namespace testing_support

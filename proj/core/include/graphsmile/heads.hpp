#pragma once

#include <random>
#include <span>
#include <vector>

#include "graphsmile/autograd.hpp"

namespace graphsmile {

/// Emotion (D_h x C_e), sentiment (D_h x C_s) and shift (2 D_h x 2)
/// classifiers, each with a bias row.
struct HeadParams {
  Param emotion_weight;
  Param emotion_bias;
  Param sentiment_weight;
  Param sentiment_bias;
  Param shift_weight;
  Param shift_bias;

  static HeadParams create(std::size_t hidden, std::size_t num_emotions, std::size_t num_sentiments,
                           std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);
};

struct HeadOutput {
  Var logits;
  Matrix probs;
  std::vector<int> preds;  // argmax, ties to the lowest index
};

HeadOutput linear_softmax_head(Var h, Var weight, Var bias);
HeadOutput emotion_head(Var h, HeadParams& params);
HeadOutput sentiment_head(Var h, HeadParams& params);

/// Mean cross-entropy over rows. Every target must be a valid class;
/// a negative target is reported as an unlabeled utterance.
Var emotion_loss(const HeadOutput& out, std::span<const int> targets, std::span<const double> class_weights = {});
Var sentiment_loss(const HeadOutput& out, std::span<const int> targets, std::span<const double> class_weights = {});

struct LossReport {
  double emotion = 0.0;
  double sentiment = 0.0;
  double shift = 0.0;
  double decay = 0.0;  // beta * ||theta||, applied by the optimizer, reported only
  double total = 0.0;  // emotion_weight * L_e + lambda_s * L_s + lambda_o * L_o
  double lambda_s = 0.0;
  double lambda_o = 0.0;
};

/// L_total = L_e + lambda_s * L_s + lambda_o * L_o. Negative lambdas are a
/// ConfigError. `emotion_weight` is 1 except for the no-L_e ablation.
LossReport total_loss(double l_e, double l_s, double l_o, double lambda_s, double lambda_o,
                      double emotion_weight = 1.0);
Var total_loss(Var l_e, Var l_s, Var l_o, double lambda_s, double lambda_o, double emotion_weight = 1.0);

}  // namespace graphsmile

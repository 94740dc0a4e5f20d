#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphsmile/config.hpp"
#include "graphsmile/data_model.hpp"
#include "graphsmile/heads.hpp"
#include "graphsmile/metrics.hpp"
#include "graphsmile/model.hpp"

namespace graphsmile {

/// Mean loss terms over one epoch's optimizer steps.
struct EpochRecord {
  std::size_t epoch = 0;
  LossReport loss;
  std::optional<EvalReport> validation;
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  /// 0 when no epoch ran; otherwise the epoch whose params are in `best`.
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  /// One entry per optimizer step, batch means.
  std::vector<LossReport> step_losses;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// AdamW over mini-batches of `batch_size` dialogues (gradients averaged
/// over the batch). With a validation set, `best` is the epoch with the
/// highest validation weighted F1 (earliest on ties); without one, the
/// last epoch. Throws NumericError naming epoch and step on a non-finite loss.
TrainResult train(const Dataset& train_set, const Dataset* validation, const RunConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Training from explicit initial parameters.
TrainResult train_from(ModelParams init, const Dataset& train_set, const Dataset* validation, const RunConfig& cfg,
                       const EpochCallback& on_epoch = {});

/// Per-utterance predictions and labels of one task over a dataset.
struct Predictions {
  std::vector<int> truth;
  std::vector<int> pred;
};

Predictions predict(const Dataset& ds, ModelParams& params, const RunConfig& cfg, Task task);
EvalReport evaluate(const Dataset& ds, ModelParams& params, const RunConfig& cfg, Task task);

/// Inverse-frequency weights over the emotion classes of a dataset.
std::vector<double> emotion_class_weights(const Dataset& ds);

enum class SweepAxis { Depth, Window };
SweepAxis parse_sweep_axis(const std::string& s);

struct ComparisonRow {
  std::string label;
  RunConfig config;
  EvalReport report;
};

/// One train + evaluate per value with the shared seed. The window axis sets P = F = value.
std::vector<ComparisonRow> sweep(const Dataset& train_set, const Dataset* validation, const Dataset& test,
                                 const RunConfig& cfg, SweepAxis axis, const std::vector<std::size_t>& values);

/// The full model ("full") followed by one run per ablation mode.
std::vector<ComparisonRow> ablate(const Dataset& train_set, const Dataset* validation, const Dataset& test,
                                  const RunConfig& cfg, const std::vector<Ablation>& modes);

// CSV output. Numbers use shortest round-trip formatting and no timing
// columns, so identical runs give identical bytes.
std::string metrics_csv(const std::vector<EpochRecord>& history, const std::optional<EvalReport>& final_report,
                        const std::vector<std::string>& class_names);
std::string losses_csv(const std::vector<EpochRecord>& history);
std::string confusion_csv(const EvalReport& report, const std::vector<std::string>& class_names);
std::string comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& key_column);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace graphsmile

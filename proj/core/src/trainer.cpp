#include "graphsmile/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "graphsmile/error.hpp"
#include "graphsmile/optimizer.hpp"
#include "graphsmile/rng.hpp"

namespace graphsmile {

std::vector<double> emotion_class_weights(const Dataset& ds) {
  const std::size_t c = ds.scheme.num_emotions();
  std::vector<double> counts(c, 0.0);
  double n = 0.0;
  for (const auto& d : ds.dialogues)
    for (const auto& u : d.utterances)
      if (u.emotion) {
        counts[static_cast<std::size_t>(*u.emotion)] += 1.0;
        n += 1.0;
      }
  std::vector<double> w(c, 1.0);
  for (std::size_t k = 0; k < c; ++k)
    if (counts[k] > 0.0) w[k] = n / (static_cast<double>(c) * counts[k]);
  return w;
}

TrainResult train(const Dataset& train_set, const Dataset* validation, const RunConfig& cfg,
                  const EpochCallback& on_epoch) {
  return train_from(ModelParams::create(model_shape(train_set, cfg), cfg.seed), train_set, validation, cfg, on_epoch);
}

TrainResult train_from(ModelParams init, const Dataset& train_set, const Dataset* validation, const RunConfig& cfg,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.dialogues.empty()) throw ConfigError("training set is empty");

  TrainResult result;
  result.last = std::move(init);
  result.best = result.last;

  std::vector<Param*> params = result.last.all();
  AdamW opt(params, AdamWOptions{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay});

  std::vector<double> class_weights;
  if (cfg.emotion_class_weights) class_weights = emotion_class_weights(train_set);
  LossOptions loss_options{class_weights, cfg.shift_class_weights};

  std::vector<std::size_t> order(train_set.dialogues.size());
  double best_wf1 = -1.0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle_rng = seeded_rng({cfg.seed, 0x73687566u, epoch});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t epoch_steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      opt.zero_grad();
      LossReport batch;
      for (std::size_t k = begin; k < end; ++k) {
        const Dialogue& d = train_set.dialogues[order[k]];
        auto rng = seeded_rng({cfg.seed, 0x64726f70u, epoch, step, k - begin});
        Tape tape;
        DialogueForward f = forward_dialogue(tape, d, result.last, cfg, true, rng, loss_options);
        if (!std::isfinite(f.report.total)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step + 1) + " (dialogue " + d.id + ")");
        }
        tape.backward(scale(f.loss, inv));
        batch.emotion += inv * f.report.emotion;
        batch.sentiment += inv * f.report.sentiment;
        batch.shift += inv * f.report.shift;
        batch.total += inv * f.report.total;
        batch.lambda_s = f.report.lambda_s;
        batch.lambda_o = f.report.lambda_o;
      }
      batch.decay = weight_decay_term(params, cfg.weight_decay);
      opt.step();
      ++step;
      ++epoch_steps;
      result.step_losses.push_back(batch);

      rec.loss.emotion += batch.emotion;
      rec.loss.sentiment += batch.sentiment;
      rec.loss.shift += batch.shift;
      rec.loss.total += batch.total;
      rec.loss.lambda_s = batch.lambda_s;
      rec.loss.lambda_o = batch.lambda_o;
    }
    const double inv_steps = 1.0 / static_cast<double>(epoch_steps);
    rec.loss.emotion *= inv_steps;
    rec.loss.sentiment *= inv_steps;
    rec.loss.shift *= inv_steps;
    rec.loss.total *= inv_steps;
    rec.loss.decay = weight_decay_term(params, cfg.weight_decay);

    if (validation != nullptr && !validation->dialogues.empty()) {
      rec.validation = evaluate(*validation, result.last, cfg, cfg.task);
      rec.validation->epoch = epoch;
      if (rec.validation->weighted_f1 > best_wf1) {
        best_wf1 = rec.validation->weighted_f1;
        result.best = result.last;
        result.best_epoch = epoch;
      }
    } else {
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (validation == nullptr || validation->dialogues.empty()) result.best = result.last;
  return result;
}

Predictions predict(const Dataset& ds, ModelParams& params, const RunConfig& cfg, Task task) {
  Predictions p;
  std::mt19937_64 unused(0);
  for (const auto& d : ds.dialogues) {
    Tape tape;
    LossOptions opts;
    opts.with_shift = false;
    const DialogueForward f = forward_dialogue(tape, d, params, cfg, false, unused, opts);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& u = d.utterances[i];
      if (task == Task::MERC) {
        p.truth.push_back(u.emotion.value_or(-1));
        p.pred.push_back(f.emotion.preds[i]);
      } else {
        p.truth.push_back(u.sentiment.value_or(-1));
        p.pred.push_back(f.sentiment.preds[i]);
      }
    }
  }
  return p;
}

EvalReport evaluate(const Dataset& ds, ModelParams& params, const RunConfig& cfg, Task task) {
  const auto start = std::chrono::steady_clock::now();
  const Predictions p = predict(ds, params, cfg, task);
  const std::size_t classes = task == Task::MERC ? ds.scheme.num_emotions() : ds.scheme.num_sentiments();
  EvalReport r = compute_metrics(p.truth, p.pred, classes);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "depth") return SweepAxis::Depth;
  if (s == "window") return SweepAxis::Window;
  throw ConfigError("sweep.axis must be depth or window, got '" + s + "'");
}

namespace {

ComparisonRow run_one(const Dataset& train_set, const Dataset* validation, const Dataset& test, RunConfig cfg,
                      std::string label) {
  cfg.validate();
  TrainResult tr = train(train_set, validation, cfg);
  ComparisonRow row{std::move(label), cfg, evaluate(test, tr.best, cfg, cfg.task)};
  row.report.epoch = tr.best_epoch;
  return row;
}

}  // namespace

std::vector<ComparisonRow> sweep(const Dataset& train_set, const Dataset* validation, const Dataset& test,
                                 const RunConfig& cfg, SweepAxis axis, const std::vector<std::size_t>& values) {
  std::vector<ComparisonRow> rows;
  for (std::size_t v : values) {
    RunConfig c = cfg;
    if (axis == SweepAxis::Depth) {
      c.depth = v;
    } else {
      c.past = v;
      c.future = v;
    }
    rows.push_back(run_one(train_set, validation, test, c, std::to_string(v)));
  }
  return rows;
}

std::vector<ComparisonRow> ablate(const Dataset& train_set, const Dataset* validation, const Dataset& test,
                                  const RunConfig& cfg, const std::vector<Ablation>& modes) {
  // Validate every variant before spending time on training.
  std::vector<RunConfig> variants{cfg};
  for (Ablation a : modes) {
    RunConfig c = cfg;
    c.ablations.insert(a);
    c.validate();
    variants.push_back(c);
  }
  std::vector<ComparisonRow> rows;
  rows.push_back(run_one(train_set, validation, test, variants[0], "full"));
  for (std::size_t i = 0; i < modes.size(); ++i)
    rows.push_back(run_one(train_set, validation, test, variants[i + 1], std::string(ablation_name(modes[i]))));
  return rows;
}

namespace {

void append_report(std::string& out, const EvalReport& r) {
  out += format_double(r.accuracy) + "," + format_double(r.weighted_f1) + "," + std::to_string(r.total) + "," +
         std::to_string(r.excluded);
  for (double f : r.per_class_f1) out += "," + format_double(f);
}

std::string report_header(const std::vector<std::string>& class_names) {
  std::string h = "accuracy,weighted_f1,total,excluded";
  for (const auto& c : class_names) h += ",f1_" + c;
  return h;
}

}  // namespace

std::string metrics_csv(const std::vector<EpochRecord>& history, const std::optional<EvalReport>& final_report,
                        const std::vector<std::string>& class_names) {
  std::string out = "epoch,split," + report_header(class_names) + "\n";
  for (const auto& rec : history) {
    if (!rec.validation) continue;
    out += std::to_string(rec.epoch) + ",val,";
    append_report(out, *rec.validation);
    out += "\n";
  }
  if (final_report) {
    out += std::to_string(final_report->epoch) + ",final,";
    append_report(out, *final_report);
    out += "\n";
  }
  return out;
}

std::string losses_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,L_e,L_s,L_o,decay,L_total\n";
  for (const auto& rec : history) {
    const LossReport& l = rec.loss;
    out += std::to_string(rec.epoch) + "," + format_double(l.emotion) + "," + format_double(l.sentiment) + "," +
           format_double(l.shift) + "," + format_double(l.decay) + "," + format_double(l.total) + "\n";
  }
  return out;
}

std::string confusion_csv(const EvalReport& report, const std::vector<std::string>& class_names) {
  std::string out = "truth";
  for (const auto& c : class_names) out += "," + c;
  out += "\n";
  for (std::size_t t = 0; t < report.confusion.size(); ++t) {
    out += t < class_names.size() ? class_names[t] : std::to_string(t);
    for (std::size_t v : report.confusion[t]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& key_column) {
  std::string out = key_column + ",best_epoch,accuracy,weighted_f1,total,excluded\n";
  for (const auto& r : rows) {
    out += r.label + "," + std::to_string(r.report.epoch) + "," + format_double(r.report.accuracy) + "," +
           format_double(r.report.weighted_f1) + "," + std::to_string(r.report.total) + "," +
           std::to_string(r.report.excluded) + "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace graphsmile

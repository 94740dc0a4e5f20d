#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "graphsmile/checkpoint.hpp"
#include "graphsmile/config.hpp"
#include "graphsmile/error.hpp"
#include "graphsmile/grad_check.hpp"
#include "graphsmile/matrix.hpp"
#include "graphsmile/model.hpp"
#include "graphsmile/rng.hpp"
#include "graphsmile/synthetic.hpp"
#include "graphsmile/trainer.hpp"
#include "json.hpp"

namespace graphsmile::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* v = std::getenv("GRAPHSMILE_LOG");
  if (v == nullptr) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0" || s == "off") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

struct Invocation {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  fs::path out_dir = "out";
  bool dry_run = false;
};

struct Context {
  Invocation inv;
  ConfigMap cfg;
  RunConfig run;
  std::ostream& out;
  std::ostream& err;
  LogLevel level;

  void info(const std::string& msg) const {
    if (level != LogLevel::Quiet) err << msg << "\n";
  }
  void debug(const std::string& msg) const {
    if (level == LogLevel::Debug) err << msg << "\n";
  }
};

json resolved_json(const RunConfig& rc) {
  json j;
  j["lr"] = rc.lr;
  j["batch_size"] = rc.batch_size;
  j["dropout"] = rc.dropout;
  j["L"] = rc.depth;
  j["P"] = rc.past;
  j["F"] = rc.future;
  j["B"] = rc.segment;
  j["lambda_s"] = rc.lambda_s;
  j["lambda_o"] = rc.lambda_o;
  j["weight_decay"] = rc.weight_decay;
  j["beta1"] = rc.beta1;
  j["beta2"] = rc.beta2;
  j["eps"] = rc.eps;
  j["D"] = rc.dim;
  j["Dh"] = rc.hidden;
  j["epochs"] = rc.epochs;
  j["seed"] = rc.seed;
  j["task"] = std::string(task_name(rc.task));
  j["slope"] = rc.slope;
  j["normalize_adjacency"] = rc.normalize_adjacency;
  j["emotion_class_weights"] = rc.emotion_class_weights;
  j["shift_class_weights"] = rc.shift_class_weights;
  json abl = json::array();
  for (Ablation a : rc.ablations) abl.push_back(std::string(ablation_name(a)));
  j["ablations"] = abl;
  return j;
}

void write_manifest(const Context& ctx) {
  json m;
  m["command"] = ctx.inv.command;
  m["config"] = ctx.cfg.values();
  m["overrides"] = ctx.cfg.overrides();
  m["resolved"] = resolved_json(ctx.run);
  m["seed"] = ctx.run.seed;
  write_text_file(ctx.inv.out_dir / "manifest.json", m.dump(2) + "\n");
}

struct Data {
  Dataset train;
  std::optional<Dataset> val;
  std::optional<Dataset> test;
};

bool synthetic_source(const ConfigMap& cfg) { return cfg.get("data.path").empty() && cfg.get("data.scheme") == "synthetic"; }

Data load_data(const Context& ctx) {
  const ConfigMap& cfg = ctx.cfg;
  const LabelScheme scheme = label_scheme_from(cfg);
  Data data;
  if (!cfg.get("data.path").empty()) {
    data.train = load_dataset(cfg.get("data.path"), scheme);
  } else if (synthetic_source(cfg)) {
    // Without a data file the generator supplies both the training set and a
    // held-out test set drawn from the following dialogue indices.
    SynthConfig sc = synth_config_from(cfg);
    data.train = generate(sc, scheme);
    sc.first_dialogue_index += sc.num_dialogues;
    data.test = generate(sc, scheme);
  } else {
    throw ConfigError("data.path is required unless data.scheme=synthetic");
  }

  if (!cfg.get("data.val_path").empty()) {
    data.val = load_dataset(cfg.get("data.val_path"), scheme);
  } else if (cfg.get_double("data.val_fraction") > 0.0) {
    auto [tr, va] = split_train_val(data.train, cfg.get_double("data.val_fraction"), ctx.run.seed);
    data.train = std::move(tr);
    data.val = std::move(va);
  }
  if (!cfg.get("data.test_path").empty()) data.test = load_dataset(cfg.get("data.test_path"), scheme);
  ctx.info("data: " + std::to_string(data.train.dialogues.size()) + " train dialogues" +
           (data.val ? ", " + std::to_string(data.val->dialogues.size()) + " validation" : std::string()) +
           (data.test ? ", " + std::to_string(data.test->dialogues.size()) + " test" : std::string()));
  return data;
}

std::vector<std::string> class_names(const LabelScheme& scheme, Task task) {
  return task == Task::MERC ? scheme.emotion_names : scheme.sentiment_names;
}

ModelParams load_or_init(const Context& ctx, const Dataset& shape_source) {
  ModelParams p = ModelParams::create(model_shape(shape_source, ctx.run), ctx.run.seed);
  const std::string& ckpt = ctx.cfg.get("eval.checkpoint");
  if (!ckpt.empty()) load_checkpoint(ckpt, p.all());
  return p;
}

const Dataset& evaluation_target(const Data& d) {
  if (d.test) return *d.test;
  if (d.val) return *d.val;
  return d.train;
}

std::string summary(const EvalReport& r) {
  return "accuracy=" + format_double(r.accuracy) + " weighted_f1=" + format_double(r.weighted_f1) +
         " total=" + std::to_string(r.total) + " excluded=" + std::to_string(r.excluded);
}

// ---------------------------------------------------------------------------

int cmd_gen(Context& ctx) {
  const SynthConfig sc = synth_config_from(ctx.cfg);
  const Dataset ds = generate(sc, synthetic_scheme(sc.num_emotions));
  const fs::path path = ctx.inv.out_dir / "dataset.jsonl";
  fs::create_directories(ctx.inv.out_dir);
  write_dataset(path, ds);
  write_manifest(ctx);
  ctx.out << "wrote " << path.string() << " (" << ds.dialogues.size() << " dialogues, " << ds.utterance_count()
          << " utterances)\n";
  return kOk;
}

int cmd_train(Context& ctx) {
  write_manifest(ctx);
  if (ctx.inv.dry_run) {
    ctx.out << "resolved config written to " << (ctx.inv.out_dir / "manifest.json").string() << "\n";
    return kOk;
  }
  const Data data = load_data(ctx);
  const Dataset* val = data.val ? &*data.val : nullptr;
  TrainResult tr = train(data.train, val, ctx.run, [&](const EpochRecord& rec) {
    std::string line = "epoch " + std::to_string(rec.epoch) + " L_total=" + format_double(rec.loss.total);
    if (rec.validation) line += " val_wf1=" + format_double(rec.validation->weighted_f1);
    ctx.debug(line);
  });

  const Dataset& target = evaluation_target(data);
  EvalReport final_report = evaluate(target, tr.best, ctx.run, ctx.run.task);
  final_report.epoch = tr.best_epoch;
  const auto names = class_names(data.train.scheme, ctx.run.task);

  write_text_file(ctx.inv.out_dir / "metrics.csv", metrics_csv(tr.history, final_report, names));
  write_text_file(ctx.inv.out_dir / "losses.csv", losses_csv(tr.history));
  write_text_file(ctx.inv.out_dir / "confusion.csv", confusion_csv(final_report, names));
  save_checkpoint(ctx.inv.out_dir / "checkpoint.json", std::as_const(tr.best).all());
  ctx.out << "best epoch " << tr.best_epoch << ": " << summary(final_report) << "\n";
  return kOk;
}

int cmd_eval(Context& ctx) {
  if (ctx.cfg.get("eval.checkpoint").empty()) throw ConfigError("eval needs eval.checkpoint");
  write_manifest(ctx);
  const LabelScheme scheme = label_scheme_from(ctx.cfg);
  Dataset ds;
  if (!ctx.cfg.get("data.test_path").empty()) {
    ds = load_dataset(ctx.cfg.get("data.test_path"), scheme);
  } else if (!ctx.cfg.get("data.path").empty()) {
    ds = load_dataset(ctx.cfg.get("data.path"), scheme);
  } else {
    ds = *load_data(ctx).test;
  }
  ModelParams params = load_or_init(ctx, ds);
  const EvalReport r = evaluate(ds, params, ctx.run, ctx.run.task);
  const auto names = class_names(scheme, ctx.run.task);
  write_text_file(ctx.inv.out_dir / "metrics.csv", metrics_csv({}, r, names));
  write_text_file(ctx.inv.out_dir / "confusion.csv", confusion_csv(r, names));
  ctx.out << summary(r) << "\n";
  return kOk;
}

int cmd_ablate(Context& ctx) {
  std::vector<Ablation> modes;
  for (const auto& m : ctx.cfg.get_list("ablate.modes")) modes.push_back(parse_ablation(m));
  write_manifest(ctx);
  const Data data = load_data(ctx);
  const auto rows = ablate(data.train, data.val ? &*data.val : nullptr, evaluation_target(data), ctx.run, modes);
  const std::string csv = comparison_csv(rows, "mode");
  write_text_file(ctx.inv.out_dir / "ablation.csv", csv);
  ctx.out << csv;
  return kOk;
}

int cmd_sweep(Context& ctx) {
  const SweepAxis axis = parse_sweep_axis(ctx.cfg.get("sweep.axis"));
  std::vector<std::size_t> values;
  for (const auto& v : ctx.cfg.get_list("sweep.values")) {
    try {
      std::size_t pos = 0;
      const long long n = std::stoll(v, &pos);
      if (pos != v.size() || n < 0) throw std::invalid_argument(v);
      values.push_back(static_cast<std::size_t>(n));
    } catch (const std::logic_error&) {
      throw ConfigError("sweep.values: '" + v + "' is not a non-negative integer");
    }
  }
  write_manifest(ctx);
  const Data data = load_data(ctx);
  const auto rows = sweep(data.train, data.val ? &*data.val : nullptr, evaluation_target(data), ctx.run, axis, values);
  const std::string csv = comparison_csv(rows, axis == SweepAxis::Depth ? "L" : "window");
  write_text_file(ctx.inv.out_dir / "sweep.csv", csv);
  ctx.out << csv;
  return kOk;
}

std::array<std::size_t, 4> block_nonzeros(const Matrix& a, std::size_t m) {
  // first-first, first-second, second-first, second-second
  std::array<std::size_t, 4> nnz{};
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      if (a(r, c) != 0.0) ++nnz[(r < m ? 0 : 2) + (c < m ? 0 : 1)];
  return nnz;
}

int cmd_inspect_graph(Context& ctx) {
  const std::size_t m = ctx.cfg.get_size("inspect.utterances");
  if (m < 1) throw ConfigError("inspect.utterances must be >= 1");
  write_manifest(ctx);
  std::array<Matrix, 3> weights;
  for (ModalityPair p : kModalityPairs) weights[static_cast<std::size_t>(p)] = make_edge_weights(p, ctx.run.window()).value;
  if (!ctx.cfg.get("eval.checkpoint").empty()) {
    const Data data = load_data(ctx);
    const ModelParams params = load_or_init(ctx, data.train);
    for (std::size_t i = 0; i < 3; ++i) weights[i] = params.edge_weights[i].value;
  }

  std::string csv = "pair,src_utt,src_modality,dst_utt,dst_modality,offset,weight\n";
  for (ModalityPair p : active_pairs(ctx.run)) {
    const auto i = static_cast<std::size_t>(p);
    const BimodalGraph g = build_bimodal_graph(m, ctx.run.window(), p);
    const auto [first, second] = pair_modalities(p);
    const auto coeff = edge_coefficients(g, ctx.run.normalize_adjacency);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const GraphEdge& edge = g.edges[e];
      const double w = weights[i].data()[edge.weight_slot] * coeff[e];
      csv += std::string(pair_tag(p)) + "," + std::to_string(g.utterance_of(edge.src)) + "," +
             modality_tag(g.in_first_modality(edge.src) ? first : second) + "," +
             std::to_string(g.utterance_of(edge.dst)) + "," +
             modality_tag(g.in_first_modality(edge.dst) ? first : second) + "," + std::to_string(g.offset(edge)) +
             "," + format_double(w) + "\n";
    }
    const Matrix a = assemble_adjacency(g, weights[i], ctx.run.normalize_adjacency);
    ctx.out << pair_tag(p) << ": nodes=" << g.num_nodes() << " edges=" << g.edges.size() << "\n";
    Matrix power = a;
    for (std::size_t l = 1; l <= std::max<std::size_t>(ctx.run.depth, 2); ++l) {
      const auto nnz = block_nonzeros(power, m);
      ctx.out << "  A^" << l << " nonzeros  intra[" << nnz[0] << "," << nnz[3] << "]  inter[" << nnz[1] << ","
              << nnz[2] << "]\n";
      power = matmul(power, a);
    }
  }
  write_text_file(ctx.inv.out_dir / "graph_edges.csv", csv);
  return kOk;
}

int cmd_inspect_shift(Context& ctx) {
  write_manifest(ctx);
  const Data data = load_data(ctx);
  const Dataset& ds = evaluation_target(data);
  ModelParams params = load_or_init(ctx, data.train);
  const std::string& only = ctx.cfg.get("inspect.dialogue");
  std::string csv = "dialogue,segment,i,j,label,predicted,p_shift\n";
  std::mt19937_64 unused(0);
  std::size_t shown = 0;
  for (const auto& d : ds.dialogues) {
    if (!only.empty() && d.id != only) continue;
    Tape tape;
    const DialogueForward f = forward_dialogue(tape, d, params, ctx.run, false, unused);
    if (!f.shift) throw LabelingError("dialogue " + d.id + ": shift pairs need a sentiment on every utterance");
    const ShiftBatch& b = *f.shift_batch;
    for (std::size_t k = 0; k < b.size(); ++k) {
      csv += d.id + "," + std::to_string(b.segment_of[k]) + "," + std::to_string(b.pairs[k].first) + "," +
             std::to_string(b.pairs[k].second) + "," + std::to_string(b.labels[k]) + "," +
             std::to_string(f.shift->preds[k]) + "," + format_double(f.shift->probs(k, 1)) + "\n";
    }
    ++shown;
  }
  if (!only.empty() && shown == 0) throw ConfigError("inspect.dialogue: no dialogue with id '" + only + "'");
  write_text_file(ctx.inv.out_dir / "shift_pairs.csv", csv);
  ctx.out << "wrote shift pairs for " << shown << " dialogue(s)\n";
  return kOk;
}

int cmd_grad_check(Context& ctx) {
  write_manifest(ctx);
  const Data data = load_data(ctx);
  const Dialogue* dialogue = &data.train.dialogues.front();
  const std::string& only = ctx.cfg.get("inspect.dialogue");
  if (!only.empty()) {
    dialogue = nullptr;
    for (const auto& d : data.train.dialogues)
      if (d.id == only) dialogue = &d;
    if (dialogue == nullptr) throw ConfigError("inspect.dialogue: no dialogue with id '" + only + "'");
  }
  ModelParams params = ModelParams::create(model_shape(data.train, ctx.run), ctx.run.seed);
  const RunConfig rc = ctx.run;
  auto loss = [&](Tape& tape) {
    std::mt19937_64 rng(0);
    return forward_dialogue(tape, *dialogue, params, rc, false, rng).loss;
  };
  const GradCheckReport r = grad_check(loss, params.all());
  ctx.out << "grad-check " << (r.passed ? "passed" : "FAILED") << ": max_relative_error=" << format_double(r.max_error)
          << " coordinates=" << r.coordinates << " failures=" << r.failures << " worst=" << r.worst_param << "["
          << r.worst_index << "] analytic=" << format_double(r.worst_analytic) << " numeric=" << format_double(r.worst_numeric) << "\n";
  return r.passed ? kOk : kFailure;
}

int dispatch(Context& ctx) {
  const std::string& c = ctx.inv.command;
  if (c == "gen") return cmd_gen(ctx);
  if (c == "train") return cmd_train(ctx);
  if (c == "eval") return cmd_eval(ctx);
  if (c == "ablate") return cmd_ablate(ctx);
  if (c == "sweep") return cmd_sweep(ctx);
  if (c == "inspect-graph") return cmd_inspect_graph(ctx);
  if (c == "inspect-shift") return cmd_inspect_shift(ctx);
  if (c == "grad-check") return cmd_grad_check(ctx);
  throw ConfigError("unknown command " + c);
}

int report(std::ostream& err, const char* kind, const std::exception& e, int code) {
  json j;
  j["error"] = kind;
  j["message"] = e.what();
  j["exit_code"] = code;
  err << j.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  CLI::App app{"Multimodal dialogue graph fusion with sentiment-shift perception"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen", "Generate a synthetic dataset (JSONL)"},
      {"train", "Train and evaluate a model"},
      {"eval", "Evaluate a checkpoint"},
      {"ablate", "Train the full model and each ablation in ablate.modes"},
      {"sweep", "Train across sweep.values of sweep.axis (depth or window)"},
      {"inspect-graph", "Dump the bimodal graphs of a dialogue of inspect.utterances utterances"},
      {"inspect-shift", "Dump per-pair shift labels and predictions"},
      {"grad-check", "Finite-difference check of every parameter gradient"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", inv.config_path, "Config file (key=value text or a run manifest)");
    sub->add_option("-s,--set", inv.overrides, "Override, key=value (repeatable, last wins)");
    sub->add_option("-o,--out", inv.out_dir, "Output directory");
    if (name == "train") sub->add_flag("--dry-run", inv.dry_run, "Resolve the config, write the manifest, stop");
    sub->callback([&inv, n = name] { inv.command = n; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kConfigError;
  }
  // A subcommand's own --help.
  for (const CLI::App* sub : app.get_subcommands()) {
    if (sub->get_help_ptr() != nullptr && sub->get_help_ptr()->count() > 0) {
      out << sub->help();
      return kOk;
    }
  }

  try {
    ConfigMap cfg = ConfigMap::defaults();
    if (!inv.config_path.empty()) cfg.merge(ConfigMap::load(inv.config_path));
    cfg.apply_overrides(inv.overrides);
    RunConfig rc = run_config_from(cfg);
    Context ctx{inv, cfg, rc, out, err, log_level()};
    return dispatch(ctx);
  } catch (const ConfigError& e) {
    return report(err, "config", e, kConfigError);
  } catch (const ParseError& e) {
    return report(err, "data", e, kDataError);
  } catch (const SchemaError& e) {
    return report(err, "data", e, kDataError);
  } catch (const VocabularyError& e) {
    return report(err, "data", e, kDataError);
  } catch (const LabelingError& e) {
    return report(err, "data", e, kDataError);
  } catch (const RangeError& e) {
    return report(err, "data", e, kDataError);
  } catch (const NumericError& e) {
    return report(err, "numeric", e, kNumericError);
  } catch (const std::exception& e) {
    return report(err, "internal", e, kFailure);
  }
}

}  // namespace graphsmile::cli

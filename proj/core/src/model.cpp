#include "graphsmile/model.hpp"

#include <algorithm>

#include "graphsmile/error.hpp"
#include "graphsmile/rng.hpp"

namespace graphsmile {

ModelShape model_shape(const Dataset& ds, const RunConfig& cfg) {
  ModelShape s;
  s.dims = ds.dims;
  s.num_emotions = ds.scheme.num_emotions();
  s.num_sentiments = ds.scheme.num_sentiments();
  s.dim = cfg.dim;
  s.hidden = cfg.hidden;
  s.depth = cfg.depth;
  s.window = cfg.window();
  return s;
}

ModelParams ModelParams::create(const ModelShape& shape, std::uint64_t seed) {
  auto rng = seeded_rng({seed, 0x696e6974u});
  ModelParams p;
  p.projection = ProjectionSet::create(shape.dims, shape.dim, rng);
  for (ModalityPair pair : kModalityPairs) {
    const auto i = static_cast<std::size_t>(pair);
    p.edge_weights[i] = make_edge_weights(pair, shape.window);
    p.stacks[i] = GsfStack::create("gsf." + std::string(pair_tag(pair)), shape.depth, shape.dim, rng);
  }
  p.theta_h = Param("fusion.theta_h", xavier_uniform(shape.dim, shape.hidden, rng));
  p.heads = HeadParams::create(shape.hidden, shape.num_emotions, shape.num_sentiments, rng);
  return p;
}

std::vector<Param*> ModelParams::all() {
  std::vector<Param*> out;
  projection.collect(out);
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back(&edge_weights[i]);
    stacks[i].collect(out);
  }
  out.push_back(&theta_h);
  heads.collect(out);
  return out;
}

std::vector<const Param*> ModelParams::all() const {
  auto mut = const_cast<ModelParams*>(this)->all();
  return {mut.begin(), mut.end()};
}

DialogueTargets dialogue_targets(const Dialogue& d) {
  DialogueTargets t;
  for (const auto& u : d.utterances) {
    t.emotion.push_back(u.emotion.value_or(-1));
    t.sentiment.push_back(u.sentiment.value_or(-1));
  }
  return t;
}

std::vector<Modality> active_modalities(const RunConfig& cfg) {
  std::vector<Modality> out;
  if (!cfg.has(Ablation::DropT)) out.push_back(Modality::Text);
  if (!cfg.has(Ablation::DropV)) out.push_back(Modality::Visual);
  if (!cfg.has(Ablation::DropA)) out.push_back(Modality::Acoustic);
  return out;
}

std::vector<ModalityPair> active_pairs(const RunConfig& cfg) {
  const auto mods = active_modalities(cfg);
  std::vector<ModalityPair> out;
  for (ModalityPair p : kModalityPairs) {
    const auto [a, b] = pair_modalities(p);
    if (std::find(mods.begin(), mods.end(), a) != mods.end() && std::find(mods.begin(), mods.end(), b) != mods.end())
      out.push_back(p);
  }
  return out;
}

ResidualMode residual_mode(const RunConfig& cfg) {
  if (cfg.has(Ablation::NoRes)) return ResidualMode::NoRes;
  if (cfg.has(Ablation::NoFcRes)) return ResidualMode::NoFcRes;
  return ResidualMode::Full;
}

namespace {

// Cross-entropy over the labeled rows only; constant zero when none are.
Var masked_loss(Tape& tape, Var logits, const std::vector<int>& targets, std::span<const double> weights) {
  std::vector<std::size_t> rows;
  std::vector<int> kept;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= 0) {
      rows.push_back(i);
      kept.push_back(targets[i]);
    }
  }
  if (rows.empty()) return tape.constant(Matrix(1, 1));
  if (rows.size() == targets.size()) return softmax_cross_entropy(logits, kept, weights);
  return softmax_cross_entropy(gather_rows(logits, std::move(rows)), kept, weights);
}

}  // namespace

DialogueForward forward_dialogue(Tape& tape, const Dialogue& d, ModelParams& params, const RunConfig& cfg,
                                 bool training, std::mt19937_64& rng, const LossOptions& loss_options) {
  if (d.utterances.empty()) throw SchemaError("dialogue " + d.id + " has no utterances");
  const std::size_t m = d.size();

  const std::array<Matrix, 3> features{feature_matrix(d, Modality::Text), feature_matrix(d, Modality::Visual),
                                       feature_matrix(d, Modality::Acoustic)};
  const auto x = project_inputs(tape, features, params.projection);

  GsfOptions gsf_opts;
  gsf_opts.slope = cfg.slope;
  gsf_opts.dropout = cfg.dropout;
  gsf_opts.residual = residual_mode(cfg);

  std::vector<Var> components;
  const auto pairs = active_pairs(cfg);
  for (ModalityPair pair : pairs) {
    const auto i = static_cast<std::size_t>(pair);
    const auto [first, second] = pair_modalities(pair);
    const BimodalGraph g = build_bimodal_graph(m, cfg.window(), pair);
    Var adj = assemble_adjacency(g, tape.param(params.edge_weights[i]), cfg.normalize_adjacency);
    Var x0 = vstack(x[static_cast<std::size_t>(first)], x[static_cast<std::size_t>(second)]);
    const GsfOutput out = gsf_forward(adj, x0, params.stacks[i], gsf_opts, training, rng);
    auto [top, bottom] = split_pair_output(out.output);
    components.push_back(top);
    components.push_back(bottom);
  }
  if (pairs.empty()) {
    // A single surviving modality has no graph; its projection feeds the fusion directly.
    for (Modality mod : active_modalities(cfg)) components.push_back(x[static_cast<std::size_t>(mod)]);
  }

  DialogueForward f;
  f.h = integrate_modalities(components, tape.param(params.theta_h), cfg.slope).h;
  f.emotion = emotion_head(f.h, params.heads);
  f.sentiment = sentiment_head(f.h, params.heads);

  const DialogueTargets targets = dialogue_targets(d);
  f.l_e = masked_loss(tape, f.emotion.logits, targets.emotion, loss_options.emotion_class_weights);
  f.l_s = masked_loss(tape, f.sentiment.logits, targets.sentiment, {});

  const double emotion_weight = cfg.has(Ablation::NoLe) ? 0.0 : 1.0;
  const double lambda_s = cfg.has(Ablation::NoLs) ? 0.0 : cfg.lambda_s;
  const double lambda_o = cfg.has(Ablation::NoLo) ? 0.0 : cfg.lambda_o;

  const bool all_sentiments =
      std::none_of(targets.sentiment.begin(), targets.sentiment.end(), [](int s) { return s < 0; });
  f.segments = segment_dialogue(m, cfg.has(Ablation::NoSeg) ? m : cfg.segment);
  if (loss_options.with_shift && (all_sentiments || lambda_o > 0.0)) {
    const auto sentiments = dialogue_sentiments(d);
    f.shift_batch = build_shift_features(f.h, f.segments, sentiments);
    f.shift = shift_forward(*f.shift_batch, tape.param(params.heads.shift_weight), tape.param(params.heads.shift_bias));
    std::vector<double> w;
    if (loss_options.shift_class_weights) w = shift_class_weights(f.shift_batch->labels);
    f.l_o = shift_loss(*f.shift, f.shift_batch->labels, w);
  } else {
    f.l_o = tape.constant(Matrix(1, 1));
  }

  f.loss = total_loss(f.l_e, f.l_s, f.l_o, lambda_s, lambda_o, emotion_weight);
  f.report = total_loss(f.l_e.value()(0, 0), f.l_s.value()(0, 0), f.l_o.value()(0, 0), lambda_s, lambda_o,
                        emotion_weight);
  return f;
}

}  // namespace graphsmile

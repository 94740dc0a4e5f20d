#include "graphsmile/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "graphsmile/error.hpp"
#include "json.hpp"

namespace graphsmile {

namespace {

struct KeySpec {
  const char* key;
  const char* fallback;
};

// Every key the CLI understands, with its default. Empty means "unset".
constexpr std::array kRegistry{
    KeySpec{"seed", "0"},
    KeySpec{"task", "merc"},
    KeySpec{"data.path", ""},
    KeySpec{"data.val_path", ""},
    KeySpec{"data.test_path", ""},
    KeySpec{"data.scheme", "iemocap6"},
    KeySpec{"data.val_fraction", "0.1"},
    KeySpec{"scheme.emotions", ""},
    KeySpec{"scheme.sentiments", "Negative,Neutral,Positive"},
    KeySpec{"scheme.map", ""},
    KeySpec{"model.D", "256"},
    KeySpec{"model.Dh", ""},
    KeySpec{"model.L", "4"},
    KeySpec{"model.P", "5"},
    KeySpec{"model.F", ""},
    KeySpec{"model.B", "10"},
    KeySpec{"model.slope", "0.01"},
    KeySpec{"model.normalize_adjacency", "false"},
    KeySpec{"train.lr", "1e-4"},
    KeySpec{"train.batch_size", "16"},
    KeySpec{"train.dropout", "0.2"},
    KeySpec{"train.epochs", "100"},
    KeySpec{"train.lambda_s", "1.0"},
    KeySpec{"train.lambda_o", "1.0"},
    KeySpec{"train.weight_decay", "1e-3"},
    KeySpec{"train.beta1", "0.9"},
    KeySpec{"train.beta2", "0.999"},
    KeySpec{"train.eps", "1e-8"},
    KeySpec{"train.emotion_class_weights", "false"},
    KeySpec{"train.shift_class_weights", "false"},
    KeySpec{"ablation", ""},
    KeySpec{"gen.num_dialogues", "40"},
    KeySpec{"gen.utterances", "12"},
    KeySpec{"gen.dims", "16,16,16"},
    KeySpec{"gen.num_emotions", "4"},
    KeySpec{"gen.signal", "3.0"},
    KeySpec{"gen.split", "0.3333333333333333,0.3333333333333333,0.3333333333333334"},
    KeySpec{"gen.shift_rate", "0.2"},
    KeySpec{"gen.first_index", "0"},
    KeySpec{"sweep.axis", "depth"},
    KeySpec{"sweep.values", "1,2,3,4,5,6,7,8"},
    KeySpec{"ablate.modes", ""},
    KeySpec{"eval.checkpoint", ""},
    KeySpec{"inspect.utterances", "4"},
    KeySpec{"inspect.dialogue", ""},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void unknown_key(const std::string& key) {
  std::string msg = "unknown config key '" + key + "'; valid keys:";
  for (const auto& k : ConfigMap::known_keys()) msg += " " + k;
  throw ConfigError(msg);
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------

std::string_view task_name(Task t) { return t == Task::MERC ? "merc" : "msac"; }

Task parse_task(std::string_view s) {
  if (s == "merc" || s == "MERC") return Task::MERC;
  if (s == "msac" || s == "MSAC") return Task::MSAC;
  throw ConfigError("task must be merc or msac, got '" + std::string(s) + "'");
}

namespace {

constexpr std::array<std::pair<Ablation, const char*>, 9> kAblationNames{{
    {Ablation::NoRes, "no_res"},
    {Ablation::NoFcRes, "no_fc_res"},
    {Ablation::NoSeg, "no_seg"},
    {Ablation::DropT, "drop_t"},
    {Ablation::DropV, "drop_v"},
    {Ablation::DropA, "drop_a"},
    {Ablation::NoLe, "no_Le"},
    {Ablation::NoLs, "no_Ls"},
    {Ablation::NoLo, "no_Lo"},
}};

}  // namespace

std::string_view ablation_name(Ablation a) {
  for (const auto& [v, n] : kAblationNames)
    if (v == a) return n;
  return "?";
}

Ablation parse_ablation(std::string_view s) {
  for (const auto& [v, n] : kAblationNames)
    if (s == n) return v;
  std::string msg = "invalid ablation mode '" + std::string(s) + "'; valid:";
  for (const auto& [v, n] : kAblationNames) msg += std::string(" ") + n;
  throw ConfigError(msg);
}

std::vector<std::string> ablation_names() {
  std::vector<std::string> out;
  for (const auto& [v, n] : kAblationNames) out.emplace_back(n);
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& ConfigMap::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& spec : kRegistry) k.emplace_back(spec.key);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

ConfigMap ConfigMap::defaults() {
  ConfigMap m;
  for (const auto& spec : kRegistry) m.values_[spec.key] = spec.fallback;
  return m;
}

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key=value");
    m.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return m;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ConfigError("config " + path.string() + ": JSON config needs a \"config\" object");
    }
    ConfigMap m;
    for (const auto& [k, v] : doc["config"].items()) {
      if (!v.is_string()) throw ConfigError("config " + path.string() + ": value of " + k + " must be a string");
      m.set(k, v.get<std::string>());
    }
    return m;
  }
  return parse(text);
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (!std::binary_search(keys.begin(), keys.end(), key)) unknown_key(key);
  values_[key] = value;
}

void ConfigMap::apply_overrides(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
    set(trim(std::string_view(a).substr(0, eq)), trim(std::string_view(a).substr(eq + 1)));
    overrides_.push_back(a);
  }
}

void ConfigMap::merge(const ConfigMap& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
  overrides_.insert(overrides_.end(), other.overrides_.begin(), other.overrides_.end());
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    const auto& keys = known_keys();
    if (!std::binary_search(keys.begin(), keys.end(), key)) unknown_key(key);
    static const std::string empty;
    return empty;
  }
  return it->second;
}

double ConfigMap::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key " + key + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::int64_t ConfigMap::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key " + key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::size_t ConfigMap::get_size(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) throw ConfigError("config key " + key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

bool ConfigMap::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off" || s.empty()) return false;
  throw ConfigError("config key " + key + ": expected a boolean, got '" + s + "'");
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string ConfigMap::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(lr > 0.0)) fail("train.lr must be > 0");
  if (batch_size < 1) fail("train.batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("train.dropout must lie in [0, 1)");
  if (depth < 1) fail("model.L must be >= 1");
  if (segment < 1) fail("model.B must be >= 1");
  if (lambda_s < 0.0 || lambda_o < 0.0) fail("train.lambda_s and train.lambda_o must be >= 0");
  if (weight_decay < 0.0) fail("train.weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("train.beta1/beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) fail("train.eps must be > 0");
  if (dim < 1 || hidden < 1) fail("model.D and model.Dh must be >= 1");
  if (slope < 0.0) fail("model.slope must be >= 0");

  const int drops = static_cast<int>(has(Ablation::DropT)) + static_cast<int>(has(Ablation::DropV)) +
                    static_cast<int>(has(Ablation::DropA));
  if (drops > 2) fail("conflicting ablations: at most two modalities can be dropped");
  if (has(Ablation::NoRes) && has(Ablation::NoFcRes)) fail("conflicting ablations: no_res and no_fc_res");
  if (task == Task::MERC && has(Ablation::NoLe)) fail("conflicting ablations: no_Le removes the MERC main loss");
  if (task == Task::MSAC && has(Ablation::NoLs)) fail("conflicting ablations: no_Ls removes the MSAC main loss");
}

RunConfig run_config_from(const ConfigMap& cfg) {
  RunConfig rc;
  rc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  rc.task = parse_task(cfg.get("task"));
  rc.dim = cfg.get_size("model.D");
  rc.hidden = cfg.get("model.Dh").empty() ? rc.dim : cfg.get_size("model.Dh");
  rc.depth = cfg.get_size("model.L");
  rc.past = cfg.get_size("model.P");
  rc.future = cfg.get("model.F").empty() ? rc.past : cfg.get_size("model.F");
  rc.segment = cfg.get_size("model.B");
  rc.slope = cfg.get_double("model.slope");
  rc.normalize_adjacency = cfg.get_bool("model.normalize_adjacency");
  rc.lr = cfg.get_double("train.lr");
  rc.batch_size = cfg.get_size("train.batch_size");
  rc.dropout = cfg.get_double("train.dropout");
  rc.epochs = cfg.get_size("train.epochs");
  rc.lambda_s = cfg.get_double("train.lambda_s");
  rc.lambda_o = cfg.get_double("train.lambda_o");
  rc.weight_decay = cfg.get_double("train.weight_decay");
  rc.beta1 = cfg.get_double("train.beta1");
  rc.beta2 = cfg.get_double("train.beta2");
  rc.eps = cfg.get_double("train.eps");
  rc.emotion_class_weights = cfg.get_bool("train.emotion_class_weights");
  rc.shift_class_weights = cfg.get_bool("train.shift_class_weights");
  for (const auto& name : cfg.get_list("ablation")) rc.ablations.insert(parse_ablation(name));
  rc.validate();
  return rc;
}

void store_run_config(const RunConfig& rc, ConfigMap& cfg) {
  cfg.set("seed", std::to_string(rc.seed));
  cfg.set("task", std::string(task_name(rc.task)));
  cfg.set("model.D", std::to_string(rc.dim));
  cfg.set("model.Dh", std::to_string(rc.hidden));
  cfg.set("model.L", std::to_string(rc.depth));
  cfg.set("model.P", std::to_string(rc.past));
  cfg.set("model.F", std::to_string(rc.future));
  cfg.set("model.B", std::to_string(rc.segment));
  cfg.set("model.slope", format_double(rc.slope));
  cfg.set("model.normalize_adjacency", rc.normalize_adjacency ? "true" : "false");
  cfg.set("train.lr", format_double(rc.lr));
  cfg.set("train.batch_size", std::to_string(rc.batch_size));
  cfg.set("train.dropout", format_double(rc.dropout));
  cfg.set("train.epochs", std::to_string(rc.epochs));
  cfg.set("train.lambda_s", format_double(rc.lambda_s));
  cfg.set("train.lambda_o", format_double(rc.lambda_o));
  cfg.set("train.weight_decay", format_double(rc.weight_decay));
  cfg.set("train.beta1", format_double(rc.beta1));
  cfg.set("train.beta2", format_double(rc.beta2));
  cfg.set("train.eps", format_double(rc.eps));
  cfg.set("train.emotion_class_weights", rc.emotion_class_weights ? "true" : "false");
  cfg.set("train.shift_class_weights", rc.shift_class_weights ? "true" : "false");
  std::string abl;
  for (Ablation a : rc.ablations) abl += (abl.empty() ? "" : ",") + std::string(ablation_name(a));
  cfg.set("ablation", abl);
}

SynthConfig synth_config_from(const ConfigMap& cfg) {
  SynthConfig sc;
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  sc.num_dialogues = cfg.get_size("gen.num_dialogues");
  sc.utterances_per_dialogue = cfg.get_size("gen.utterances");
  sc.num_emotions = cfg.get_size("gen.num_emotions");
  sc.signal_strength = cfg.get_double("gen.signal");
  sc.shift_rate = cfg.get_double("gen.shift_rate");
  sc.first_dialogue_index = cfg.get_size("gen.first_index");

  auto numbers = [&](const std::string& key) {
    std::vector<double> out;
    for (const auto& item : cfg.get_list(key)) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw ConfigError("config key " + key + ": bad number '" + item + "'");
      }
      out.push_back(v);
    }
    if (out.size() != 3) throw ConfigError("config key " + key + ": expected three comma-separated values");
    return out;
  };
  const auto dims = numbers("gen.dims");
  for (double d : dims) {
    if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) {
      throw ConfigError("gen.dims must be positive integers");
    }
  }
  sc.dims = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]), static_cast<std::size_t>(dims[2])};
  const auto split = numbers("gen.split");
  sc.modality_signal_split = {split[0], split[1], split[2]};
  sc.validate();
  return sc;
}

LabelScheme label_scheme_from(const ConfigMap& cfg) {
  const std::string& name = cfg.get("data.scheme");
  if (name == "synthetic") return synthetic_scheme(cfg.get_size("gen.num_emotions"));
  if (name == "custom") {
    return custom_scheme(cfg.get_list("scheme.emotions"), cfg.get_list("scheme.sentiments"),
                         cfg.get_list("scheme.map"));
  }
  return builtin_scheme(name);
}

}  // namespace graphsmile

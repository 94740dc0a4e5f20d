#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graphsmile/data_model.hpp"
#include "graphsmile/dialogue_graph.hpp"
#include "graphsmile/synthetic.hpp"

namespace graphsmile {

enum class Task { MERC, MSAC };

enum class Ablation { NoRes, NoFcRes, NoSeg, DropT, DropV, DropA, NoLe, NoLs, NoLo };

std::string_view task_name(Task t);
Task parse_task(std::string_view s);
std::string_view ablation_name(Ablation a);
Ablation parse_ablation(std::string_view s);
std::vector<std::string> ablation_names();

/// Flat `key=value` configuration with dotted namespaces. Keys are checked
/// against a fixed registry; unknown keys are a ConfigError that lists the
/// valid ones. Later assignments win.
class ConfigMap {
 public:
  /// Registry defaults for every known key.
  static ConfigMap defaults();
  static const std::vector<std::string>& known_keys();

  /// Text format: one `key=value` per line, `#` starts a comment.
  static ConfigMap parse(std::string_view text);
  /// Accepts key=value text, or a run manifest JSON (its "config" object).
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Applies "key=value" strings in order, recording each in overrides().
  void apply_overrides(const std::vector<std::string>& assignments);
  /// Overlays `other` onto this map.
  void merge(const ConfigMap& other);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  const std::vector<std::string>& overrides() const noexcept { return overrides_; }

  /// Canonical key=value text, keys sorted.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> overrides_;
};

/// Fully resolved training configuration.
struct RunConfig {
  double lr = 1e-4;
  std::size_t batch_size = 16;
  double dropout = 0.2;
  std::size_t depth = 4;        // L
  std::size_t past = 5;         // P
  std::size_t future = 5;       // F
  std::size_t segment = 10;     // B
  double lambda_s = 1.0;
  double lambda_o = 1.0;
  double weight_decay = 1e-3;   // beta
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t dim = 256;        // D
  std::size_t hidden = 256;     // D_h
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::set<Ablation> ablations;
  Task task = Task::MERC;
  double slope = 0.01;
  bool normalize_adjacency = false;
  bool emotion_class_weights = false;
  bool shift_class_weights = false;

  Window window() const { return {past, future}; }
  bool has(Ablation a) const { return ablations.count(a) != 0; }
  /// Range checks plus ablation consistency. Throws ConfigError.
  void validate() const;
};

RunConfig run_config_from(const ConfigMap& cfg);
/// Writes every RunConfig field back as registry keys.
void store_run_config(const RunConfig& rc, ConfigMap& cfg);
SynthConfig synth_config_from(const ConfigMap& cfg);
/// Built-in scheme by `data.scheme`, or the custom one from `scheme.*`.
LabelScheme label_scheme_from(const ConfigMap& cfg);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace graphsmile

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace graphsmile {

enum class Modality : int { Text = 0, Visual = 1, Acoustic = 2 };

inline constexpr std::array<Modality, 3> kModalities = {Modality::Text, Modality::Visual, Modality::Acoustic};

char modality_tag(Modality m);

struct Utterance {
  std::string id;
  std::optional<std::string> speaker;
  std::vector<double> text;
  std::vector<double> visual;
  std::vector<double> acoustic;
  std::optional<int> emotion;
  std::optional<int> sentiment;
  std::optional<double> intensity;
  // Set when the label was filled in at load time rather than read from the
  // file; the writer omits derived labels.
  bool emotion_derived = false;
  bool sentiment_derived = false;

  const std::vector<double>& features(Modality m) const;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> utterances;

  std::size_t size() const noexcept { return utterances.size(); }
};

/// Emotion and sentiment vocabularies plus the emotion -> sentiment merge.
struct LabelScheme {
  std::string name;
  std::vector<std::string> emotion_names;
  std::vector<std::string> sentiment_names{"Negative", "Neutral", "Positive"};
  std::vector<int> emotion_to_sentiment;
  // The emotion classes are the seven intensity bins (CMU-MOSEI style), so an
  // utterance carrying only an intensity gets its emotion label from it.
  bool emotions_from_intensity = false;

  std::size_t num_emotions() const noexcept { return emotion_names.size(); }
  std::size_t num_sentiments() const noexcept { return sentiment_names.size(); }
  int emotion_index(std::string_view label) const;
  int sentiment_index(std::string_view label) const;
  /// Throws ConfigError unless the merge map is total and in range.
  void validate() const;
};

LabelScheme iemocap6_scheme();
LabelScheme iemocap4_scheme();
LabelScheme meld_scheme();
LabelScheme mosei7_scheme();
std::vector<std::string> builtin_scheme_names();
LabelScheme builtin_scheme(std::string_view name);
/// `mapping[i]` names the sentiment that emotion i merges into.
LabelScheme custom_scheme(std::vector<std::string> emotions, std::vector<std::string> sentiments,
                          const std::vector<std::string>& mapping);

struct FeatureDims {
  std::size_t text = 0;
  std::size_t visual = 0;
  std::size_t acoustic = 0;

  std::size_t of(Modality m) const;
  friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

struct Dataset {
  std::vector<Dialogue> dialogues;
  LabelScheme scheme;
  FeatureDims dims;

  std::size_t utterance_count() const;
  /// Checks every structural invariant (unique ids, non-empty dialogues,
  /// shared feature dims, label ranges). Throws SchemaError/VocabularyError.
  void validate() const;
};

int merge_emotion_to_sentiment(int emotion, const LabelScheme& scheme);

enum class IntensityBin : int {
  HighlyNegative = 0,
  Negative,
  WeaklyNegative,
  Neutral,
  WeaklyPositive,
  Positive,
  HighlyPositive,
};

inline constexpr int kIntensityBins = 7;

/// Bins: [-3,-2) [-2,-1) [-1,0) {0} (0,1] (1,2] (2,3].
int bin_intensity(double x);
/// Seven intensity bins -> Negative(0) / Neutral(1) / Positive(2).
int collapse_intensity_bin(int bin);

/// Fills derived labels (sentiment from emotion or intensity, emotion from
/// intensity when the scheme allows it) in place.
void derive_labels(Utterance& u, const LabelScheme& scheme);

Dataset parse_dataset(std::istream& in, const LabelScheme& scheme);
Dataset load_dataset(const std::filesystem::path& path, const LabelScheme& scheme);
void write_dataset(std::ostream& out, const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Dialogue-level split; validation gets round(fraction * n) dialogues, and
/// both partitions keep file order.
std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace graphsmile

#include "graphsmile/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "graphsmile/error.hpp"
#include "json.hpp"

namespace graphsmile {

using nlohmann::json;

char modality_tag(Modality m) {
  switch (m) {
    case Modality::Text: return 't';
    case Modality::Visual: return 'v';
    case Modality::Acoustic: return 'a';
  }
  return '?';
}

const std::vector<double>& Utterance::features(Modality m) const {
  switch (m) {
    case Modality::Text: return text;
    case Modality::Visual: return visual;
    case Modality::Acoustic: return acoustic;
  }
  return text;
}

std::size_t FeatureDims::of(Modality m) const {
  switch (m) {
    case Modality::Text: return text;
    case Modality::Visual: return visual;
    case Modality::Acoustic: return acoustic;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Label schemes

namespace {

int index_of(const std::vector<std::string>& names, std::string_view label, const char* kind,
             const std::string& scheme) {
  auto it = std::find(names.begin(), names.end(), label);
  if (it == names.end()) {
    throw VocabularyError("unknown " + std::string(kind) + " label '" + std::string(label) + "' for scheme " +
                          scheme);
  }
  return static_cast<int>(it - names.begin());
}

}  // namespace

int LabelScheme::emotion_index(std::string_view label) const {
  return index_of(emotion_names, label, "emotion", name);
}

int LabelScheme::sentiment_index(std::string_view label) const {
  return index_of(sentiment_names, label, "sentiment", name);
}

void LabelScheme::validate() const {
  if (emotion_names.empty()) throw ConfigError("scheme " + name + ": no emotion classes");
  if (sentiment_names.empty()) throw ConfigError("scheme " + name + ": no sentiment classes");
  if (emotion_to_sentiment.size() != emotion_names.size()) {
    throw ConfigError("scheme " + name + ": emotion-to-sentiment map is not total");
  }
  for (int s : emotion_to_sentiment) {
    if (s < 0 || static_cast<std::size_t>(s) >= sentiment_names.size()) {
      throw ConfigError("scheme " + name + ": merge target out of range");
    }
  }
  if (emotions_from_intensity && (emotion_names.size() != kIntensityBins || sentiment_names.size() != 3)) {
    throw ConfigError("scheme " + name + ": intensity-derived emotions need 7 emotions and 3 sentiments");
  }
}

LabelScheme custom_scheme(std::vector<std::string> emotions, std::vector<std::string> sentiments,
                          const std::vector<std::string>& mapping) {
  LabelScheme s;
  s.name = "custom";
  s.emotion_names = std::move(emotions);
  s.sentiment_names = std::move(sentiments);
  if (mapping.size() != s.emotion_names.size()) {
    throw ConfigError("custom scheme: " + std::to_string(mapping.size()) + " merge targets for " +
                      std::to_string(s.emotion_names.size()) + " emotions");
  }
  for (const auto& m : mapping) {
    auto it = std::find(s.sentiment_names.begin(), s.sentiment_names.end(), m);
    if (it == s.sentiment_names.end()) throw ConfigError("custom scheme: unknown sentiment '" + m + "'");
    s.emotion_to_sentiment.push_back(static_cast<int>(it - s.sentiment_names.begin()));
  }
  s.validate();
  return s;
}

LabelScheme iemocap6_scheme() {
  LabelScheme s;
  s.name = "iemocap6";
  s.emotion_names = {"Happy", "Sad", "Neutral", "Angry", "Excited", "Frustrated"};
  s.emotion_to_sentiment = {2, 0, 1, 0, 2, 0};
  return s;
}

LabelScheme iemocap4_scheme() {
  LabelScheme s;
  s.name = "iemocap4";
  s.emotion_names = {"Happy", "Sad", "Neutral", "Angry"};
  s.emotion_to_sentiment = {2, 0, 1, 0};
  return s;
}

// MELD ships its own sentiment annotation, which always wins when present.
// The merge map is the fallback for records without one.
LabelScheme meld_scheme() {
  LabelScheme s;
  s.name = "meld";
  s.emotion_names = {"Neutral", "Surprise", "Fear", "Sadness", "Joy", "Disgust", "Anger"};
  s.emotion_to_sentiment = {1, 2, 0, 0, 2, 0, 0};
  return s;
}

LabelScheme mosei7_scheme() {
  LabelScheme s;
  s.name = "mosei7";
  s.emotion_names = {"HighlyNegative", "Negative",       "WeaklyNegative", "Neutral",
                     "WeaklyPositive", "Positive",       "HighlyPositive"};
  s.emotion_to_sentiment = {0, 0, 0, 1, 2, 2, 2};
  s.emotions_from_intensity = true;
  return s;
}

std::vector<std::string> builtin_scheme_names() { return {"iemocap6", "iemocap4", "meld", "mosei7"}; }

LabelScheme builtin_scheme(std::string_view name) {
  if (name == "iemocap6") return iemocap6_scheme();
  if (name == "iemocap4") return iemocap4_scheme();
  if (name == "meld") return meld_scheme();
  if (name == "mosei7") return mosei7_scheme();
  throw ConfigError("unknown label scheme '" + std::string(name) + "' (built-ins: iemocap6, iemocap4, meld, mosei7)");
}

int merge_emotion_to_sentiment(int emotion, const LabelScheme& scheme) {
  if (emotion < 0 || static_cast<std::size_t>(emotion) >= scheme.emotion_to_sentiment.size()) {
    throw VocabularyError("emotion index " + std::to_string(emotion) + " out of range for scheme " + scheme.name);
  }
  return scheme.emotion_to_sentiment[static_cast<std::size_t>(emotion)];
}

int bin_intensity(double x) {
  if (!(x >= -3.0 && x <= 3.0)) {
    throw RangeError("intensity " + std::to_string(x) + " outside [-3, 3]");
  }
  if (x < -2.0) return 0;
  if (x < -1.0) return 1;
  if (x < 0.0) return 2;
  if (x == 0.0) return 3;
  if (x <= 1.0) return 4;
  if (x <= 2.0) return 5;
  return 6;
}

int collapse_intensity_bin(int bin) {
  if (bin < 0 || bin >= kIntensityBins) throw RangeError("intensity bin " + std::to_string(bin) + " out of range");
  if (bin < 3) return 0;
  if (bin == 3) return 1;
  return 2;
}

void derive_labels(Utterance& u, const LabelScheme& scheme) {
  if (!u.emotion && u.intensity && scheme.emotions_from_intensity) {
    u.emotion = bin_intensity(*u.intensity);
    u.emotion_derived = true;
  }
  if (!u.sentiment) {
    if (u.emotion) {
      u.sentiment = merge_emotion_to_sentiment(*u.emotion, scheme);
      u.sentiment_derived = true;
    } else if (u.intensity) {
      if (scheme.num_sentiments() != 3) {
        throw SchemaError("utterance " + u.id + ": intensity-only labels need a 3-class sentiment vocabulary");
      }
      u.sentiment = collapse_intensity_bin(bin_intensity(*u.intensity));
      u.sentiment_derived = true;
    }
  }
}

// ---------------------------------------------------------------------------
// Dataset

std::size_t Dataset::utterance_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.size();
  return n;
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const auto& d : dialogues) {
    if (!ids.insert(d.id).second) throw SchemaError("duplicate dialogue id " + d.id);
    if (d.utterances.empty()) throw SchemaError("dialogue " + d.id + " has no utterances");
    for (const auto& u : d.utterances) {
      for (Modality m : kModalities) {
        if (u.features(m).size() != dims.of(m)) {
          throw SchemaError("dialogue " + d.id + ", utterance " + u.id + ": " + modality_tag(m) +
                            " features have dimension " + std::to_string(u.features(m).size()) + ", expected " +
                            std::to_string(dims.of(m)));
        }
      }
      if (!u.emotion && !u.sentiment && !u.intensity) {
        throw SchemaError("dialogue " + d.id + ", utterance " + u.id + ": no emotion, sentiment or intensity");
      }
      if (u.emotion && (*u.emotion < 0 || static_cast<std::size_t>(*u.emotion) >= scheme.num_emotions())) {
        throw VocabularyError("utterance " + u.id + ": emotion index out of range");
      }
      if (u.sentiment && (*u.sentiment < 0 || static_cast<std::size_t>(*u.sentiment) >= scheme.num_sentiments())) {
        throw VocabularyError("utterance " + u.id + ": sentiment index out of range");
      }
    }
  }
}

namespace {

std::vector<double> read_features(const json& rec, const char* key, const std::string& dlg, const std::string& utt,
                                  std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) {
    throw SchemaError("line " + std::to_string(line) + ", dialogue " + dlg + ", utterance " + utt + ": missing '" +
                      key + "' features");
  }
  if (!it->is_array()) throw ParseError(line, std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError(line, std::string("'") + key + "' must be an array of numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError("utterance " + utt + ": non-finite feature value");
    out.push_back(x);
  }
  return out;
}

Dialogue parse_dialogue(const json& rec, const LabelScheme& scheme, std::size_t line) {
  if (!rec.is_object()) throw ParseError(line, "record is not a JSON object");
  Dialogue d;
  if (!rec.contains("id") || !rec["id"].is_string()) throw ParseError(line, "dialogue record needs a string 'id'");
  d.id = rec["id"].get<std::string>();
  if (!rec.contains("utterances") || !rec["utterances"].is_array()) {
    throw ParseError(line, "dialogue " + d.id + " needs an 'utterances' array");
  }
  for (const json& ur : rec["utterances"]) {
    if (!ur.is_object()) throw ParseError(line, "utterance is not a JSON object");
    Utterance u;
    if (!ur.contains("id") || !ur["id"].is_string()) throw ParseError(line, "utterance needs a string 'id'");
    u.id = ur["id"].get<std::string>();
    if (auto it = ur.find("speaker"); it != ur.end() && !it->is_null()) u.speaker = it->get<std::string>();
    u.text = read_features(ur, "t", d.id, u.id, line);
    u.visual = read_features(ur, "v", d.id, u.id, line);
    u.acoustic = read_features(ur, "a", d.id, u.id, line);
    if (auto it = ur.find("emotion"); it != ur.end() && !it->is_null()) {
      u.emotion = scheme.emotion_index(it->get<std::string>());
    }
    if (auto it = ur.find("sentiment"); it != ur.end() && !it->is_null()) {
      u.sentiment = scheme.sentiment_index(it->get<std::string>());
    }
    if (auto it = ur.find("intensity"); it != ur.end() && !it->is_null()) {
      if (!it->is_number()) throw ParseError(line, "'intensity' must be a number");
      u.intensity = it->get<double>();
      bin_intensity(*u.intensity);  // range check
    }
    if (!u.emotion && !u.sentiment && !u.intensity) {
      throw SchemaError("dialogue " + d.id + ", utterance " + u.id + ": no emotion, sentiment or intensity label");
    }
    derive_labels(u, scheme);
    d.utterances.push_back(std::move(u));
  }
  return d;
}

json utterance_to_json(const Utterance& u, const LabelScheme& scheme) {
  json j;
  j["id"] = u.id;
  if (u.speaker) j["speaker"] = *u.speaker;
  j["t"] = u.text;
  j["v"] = u.visual;
  j["a"] = u.acoustic;
  if (u.emotion && !u.emotion_derived) j["emotion"] = scheme.emotion_names.at(static_cast<std::size_t>(*u.emotion));
  if (u.sentiment && !u.sentiment_derived) {
    j["sentiment"] = scheme.sentiment_names.at(static_cast<std::size_t>(*u.sentiment));
  }
  if (u.intensity) j["intensity"] = *u.intensity;
  return j;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const LabelScheme& scheme) {
  scheme.validate();
  Dataset ds;
  ds.scheme = scheme;
  std::string text;
  std::size_t line = 0;
  bool have_dims = false;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    Dialogue d;
    try {
      d = parse_dialogue(rec, scheme, line);
    } catch (const json::exception& e) {
      throw ParseError(line, std::string("unexpected value type: ") + e.what());
    }
    if (d.utterances.empty()) throw SchemaError("line " + std::to_string(line) + ": dialogue " + d.id + " is empty");
    if (!have_dims) {
      const auto& u0 = d.utterances.front();
      ds.dims = {u0.text.size(), u0.visual.size(), u0.acoustic.size()};
      have_dims = true;
    }
    ds.dialogues.push_back(std::move(d));
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset " + path.string());
  return parse_dataset(in, scheme);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  for (const auto& d : ds.dialogues) {
    json rec;
    rec["id"] = d.id;
    json utts = json::array();
    for (const auto& u : d.utterances) utts.push_back(utterance_to_json(u, ds.scheme));
    rec["utterances"] = std::move(utts);
    out << rec.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, ds);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  const std::size_t n = ds.dialogues.size();
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) {
    throw ConfigError("validation fraction " + std::to_string(fraction) + " of " + std::to_string(n) +
                      " dialogues leaves an empty partition");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_val(n, false);
  for (std::size_t k = 0; k < n_val; ++k) is_val[order[k]] = true;

  Dataset train;
  Dataset val;
  train.scheme = val.scheme = ds.scheme;
  train.dims = val.dims = ds.dims;
  for (std::size_t i = 0; i < n; ++i) (is_val[i] ? val : train).dialogues.push_back(ds.dialogues[i]);
  return {std::move(train), std::move(val)};
}

}  // namespace graphsmile

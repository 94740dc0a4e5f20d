#include "graphsmile/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "graphsmile/error.hpp"

namespace graphsmile {

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint32_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kPrototypeTag = 0x50524f54;  // "PROT"
constexpr std::uint32_t kDialogueTag = 0x444c4731;   // "DLG1"

std::vector<double> unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_dialogues < 1 || utterances_per_dialogue < 1 || num_emotions < 1) {
    throw ConfigError("synthetic config: counts must be >= 1");
  }
  if (dims.text < 1 || dims.visual < 1 || dims.acoustic < 1) {
    throw ConfigError("synthetic config: feature dimensions must be >= 1");
  }
  if (!(signal_strength >= 0.0)) throw ConfigError("synthetic config: signal_strength must be >= 0");
  double total = 0.0;
  for (double s : modality_signal_split) {
    if (!(s >= 0.0)) throw ConfigError("synthetic config: modality split entries must be >= 0");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synthetic config: modality split must sum to 1");
  if (!(shift_rate >= 0.0 && shift_rate <= 1.0)) throw ConfigError("synthetic config: shift_rate must lie in [0, 1]");
}

LabelScheme synthetic_scheme(std::size_t num_emotions) {
  LabelScheme s;
  s.name = "synthetic";
  for (std::size_t k = 0; k < num_emotions; ++k) {
    s.emotion_names.push_back("E" + std::to_string(k));
    s.emotion_to_sentiment.push_back(static_cast<int>(k % 3));
  }
  return s;
}

Matrix emotion_transition_matrix(const LabelScheme& scheme, double shift_rate) {
  const std::size_t n = scheme.num_emotions();
  const std::size_t groups = scheme.num_sentiments();
  std::vector<double> size(groups, 0.0);
  for (int s : scheme.emotion_to_sentiment) size[static_cast<std::size_t>(s)] += 1.0;
  std::size_t present = 0;
  for (double c : size) present += c > 0.0;
  const bool can_jump = present >= 2;
  if (shift_rate > 0.0 && !can_jump) {
    throw ConfigError("synthetic config: shift_rate > 0 needs at least two sentiments among the emotions");
  }

  // Probability mass moved between sentiment groups per step of the jump
  // kernel. A symmetric flow with zero diagonal and margins equal to the group
  // sizes makes the kernel doubly stochastic; it exists when no group holds
  // more than half of the emotions.
  Matrix flow(groups, groups);
  bool balanced = false;
  if (present == 2) {
    std::vector<std::size_t> g;
    for (std::size_t k = 0; k < groups; ++k)
      if (size[k] > 0.0) g.push_back(k);
    if (size[g[0]] == size[g[1]]) {
      flow(g[0], g[1]) = flow(g[1], g[0]) = size[g[0]];
      balanced = true;
    }
  } else if (present == 3 && groups == 3) {
    const double total = size[0] + size[1] + size[2];
    balanced = true;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        if (a != b) {
          const double f = (size[a] + size[b] - (total - size[a] - size[b])) / 2.0;
          balanced = balanced && f >= 0.0;
          flow(a, b) = f;
        }
  }

  Matrix jump(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto gi = static_cast<std::size_t>(scheme.emotion_to_sentiment[i]);
    double other = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (static_cast<std::size_t>(scheme.emotion_to_sentiment[j]) != gi) other += 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto gj = static_cast<std::size_t>(scheme.emotion_to_sentiment[j]);
      if (gi == gj) continue;
      // Without a balanced flow, jump uniformly; the emotion marginal is then
      // no longer uniform.
      jump(i, j) = balanced ? flow(gi, gj) / (size[gi] * size[gj]) : 1.0 / other;
    }
  }

  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    t(i, i) = 1.0 - shift_rate;
    if (can_jump)
      for (std::size_t j = 0; j < n; ++j) t(i, j) += shift_rate * jump(i, j);
  }
  return t;
}

Dataset generate(const SynthConfig& cfg, const LabelScheme& scheme) {
  cfg.validate();
  scheme.validate();
  if (scheme.num_emotions() != cfg.num_emotions) {
    throw ConfigError("synthetic config: scheme has " + std::to_string(scheme.num_emotions()) +
                      " emotions, config asks for " + std::to_string(cfg.num_emotions));
  }

  // prototypes[class][modality]
  std::vector<std::array<std::vector<double>, 3>> prototypes(cfg.num_emotions);
  {
    auto rng = substream(cfg.seed, kPrototypeTag, 0);
    for (auto& per_class : prototypes)
      for (Modality m : kModalities) per_class[static_cast<int>(m)] = unit_vector(cfg.dims.of(m), rng);
  }
  const Matrix transition = emotion_transition_matrix(scheme, cfg.shift_rate);

  Dataset ds;
  ds.scheme = scheme;
  ds.dims = cfg.dims;
  ds.dialogues.reserve(cfg.num_dialogues);
  for (std::size_t k = 0; k < cfg.num_dialogues; ++k) {
    const std::size_t index = cfg.first_dialogue_index + k;
    auto rng = substream(cfg.seed, kDialogueTag, index);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> first(0, static_cast<int>(cfg.num_emotions) - 1);

    Dialogue d;
    d.id = "dlg" + std::to_string(index);
    int emotion = first(rng);
    for (std::size_t j = 0; j < cfg.utterances_per_dialogue; ++j) {
      if (j > 0) {
        const double u = unif(rng);
        double acc = 0.0;
        int next = emotion;
        for (std::size_t c = 0; c < cfg.num_emotions; ++c) {
          acc += transition(static_cast<std::size_t>(emotion), c);
          if (u < acc) {
            next = static_cast<int>(c);
            break;
          }
        }
        emotion = next;
      }
      Utterance u;
      u.id = d.id + "_u" + std::to_string(j);
      u.speaker = (j % 2 == 0) ? "A" : "B";
      u.emotion = emotion;
      for (Modality m : kModalities) {
        const auto mi = static_cast<std::size_t>(m);
        const double amp = cfg.signal_strength * cfg.modality_signal_split[mi];
        const auto& proto = prototypes[static_cast<std::size_t>(emotion)][mi];
        std::vector<double> feat(proto.size());
        for (std::size_t c = 0; c < feat.size(); ++c) feat[c] = amp * proto[c] + noise(rng);
        (m == Modality::Text ? u.text : m == Modality::Visual ? u.visual : u.acoustic) = std::move(feat);
      }
      derive_labels(u, scheme);
      d.utterances.push_back(std::move(u));
    }
    ds.dialogues.push_back(std::move(d));
  }
  return ds;
}

}  // namespace graphsmile

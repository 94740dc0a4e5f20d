#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "graphsmile/data_model.hpp"
#include "graphsmile/error.hpp"
#include "json.hpp"

using namespace graphsmile;

namespace {

const char* kTwoDialogues =
    R"({"id":"d1","utterances":[{"id":"u1","speaker":"A","t":[0.5,1],"v":[2],"a":[3,4,5],"emotion":"Sad"},)"
    R"({"id":"u2","t":[1,2],"v":[0],"a":[0,0,1],"emotion":"Happy","sentiment":"Negative"},)"
    R"({"id":"u3","t":[-1,0.25],"v":[1e-3],"a":[1,2,3],"sentiment":"Neutral"}]})"
    "\n"
    R"({"id":"d2","utterances":[{"id":"v1","t":[1,1],"v":[1],"a":[1,1,1],"emotion":"Neutral"},)"
    R"({"id":"v2","t":[2,2],"v":[2],"a":[2,2,2],"emotion":"Excited"},)"
    R"({"id":"v3","t":[3,3],"v":[3],"a":[3,3,3],"intensity":-1.5},)"
    R"({"id":"v4","t":[4,4],"v":[4],"a":[4,4,4],"emotion":"Frustrated","intensity":2.0}]})"
    "\n";

Dataset parse(const std::string& text, const LabelScheme& scheme = iemocap6_scheme()) {
  std::istringstream in(text);
  return parse_dataset(in, scheme);
}

std::string canonical_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::json::parse(line);
    // Feature values and intensities are reals even when written as integers.
    for (auto& u : rec["utterances"]) {
      for (const char* key : {"t", "v", "a"}) u[key] = u[key].get<std::vector<double>>();
      if (u.contains("intensity")) u["intensity"] = u["intensity"].get<double>();
    }
    out += rec.dump() + "\n";
  }
  return out;
}

Dataset numbered(std::size_t n) {
  Dataset ds;
  ds.scheme = iemocap6_scheme();
  ds.dims = {1, 1, 1};
  for (std::size_t i = 0; i < n; ++i) {
    Dialogue d;
    d.id = "dlg" + std::to_string(i);
    Utterance u;
    u.id = d.id + "_0";
    u.text = {1.0};
    u.visual = {1.0};
    u.acoustic = {1.0};
    u.emotion = 0;
    derive_labels(u, ds.scheme);
    d.utterances.push_back(u);
    ds.dialogues.push_back(d);
  }
  return ds;
}

std::vector<std::string> ids_of(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds.dialogues) out.push_back(d.id);
  return out;
}

}  // namespace

TEST_SUITE("data_model") {
  TEST_CASE("loading preserves counts, order and labels") {
    const Dataset ds = parse(kTwoDialogues);
    REQUIRE(ds.dialogues.size() == 2);
    CHECK(ds.dialogues[0].size() == 3);
    CHECK(ds.dialogues[1].size() == 4);
    CHECK(ds.utterance_count() == 7);
    CHECK(ds.dims == FeatureDims{2, 1, 3});
    CHECK(ds.dialogues[0].id == "d1");
    CHECK(ds.dialogues[1].id == "d2");

    const auto& u1 = ds.dialogues[0].utterances[0];
    CHECK(u1.speaker.value() == "A");
    CHECK(u1.emotion.value() == 1);
    CHECK(u1.sentiment.value() == 0);
    CHECK(u1.sentiment_derived);
    // Explicit sentiment wins over the merge.
    CHECK(ds.dialogues[0].utterances[1].sentiment.value() == 0);
    CHECK_FALSE(ds.dialogues[0].utterances[2].emotion.has_value());
    // Intensity-only utterance: sentiment from the collapsed bin, no emotion in a non-intensity scheme.
    const auto& v3 = ds.dialogues[1].utterances[2];
    CHECK_FALSE(v3.emotion.has_value());
    CHECK(v3.sentiment.value() == 0);
  }

  TEST_CASE("missing modality is a schema error naming the utterance") {
    const std::string text = R"({"id":"d","utterances":[{"id":"u7","t":[1],"v":[1],"emotion":"Sad"}]})";
    try {
      parse(text);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("u7") != std::string::npos);
    }
  }

  TEST_CASE("load errors") {
    SUBCASE("malformed JSON names the line") {
      const std::string text = std::string(kTwoDialogues) + "{not json\n";
      try {
        parse(text);
        FAIL("expected a parse error");
      } catch (const ParseError& e) {
        CHECK(e.line() == 3);
      }
    }
    SUBCASE("inconsistent feature dimension") {
      const std::string text = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1],"emotion":"Sad"},)"
                               R"({"id":"b","t":[1,2],"v":[1],"a":[1],"emotion":"Sad"}]})";
      try {
        parse(text);
        FAIL("expected a schema error");
      } catch (const SchemaError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("d") != std::string::npos);
        CHECK(msg.find("b") != std::string::npos);
      }
    }
    SUBCASE("unknown label") {
      const std::string text = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1],"emotion":"sad"}]})";
      CHECK_THROWS_AS(parse(text), VocabularyError);
    }
    SUBCASE("no label at all") {
      const std::string text = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1]}]})";
      CHECK_THROWS_AS(parse(text), SchemaError);
    }
    SUBCASE("duplicate dialogue id") {
      const std::string one = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1],"emotion":"Sad"}]})";
      CHECK_THROWS_AS(parse(one + "\n" + one + "\n"), SchemaError);
    }
    SUBCASE("empty dialogue") {
      CHECK_THROWS_AS(parse(R"({"id":"d","utterances":[]})"), SchemaError);
    }
    SUBCASE("intensity out of range") {
      const std::string text = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1],"intensity":3.5}]})";
      CHECK_THROWS_AS(parse(text), RangeError);
    }
  }

  TEST_CASE("write after load equals the canonical form of the input") {
    const Dataset ds = parse(kTwoDialogues);
    std::ostringstream out;
    write_dataset(out, ds);
    CHECK(out.str() == canonical_lines(kTwoDialogues));
    // A second pass is a fixed point.
    std::ostringstream again;
    write_dataset(again, parse(out.str()));
    CHECK(again.str() == out.str());
  }

  TEST_CASE("merge tables of every built-in scheme") {
    struct Row {
      LabelScheme scheme;
      std::vector<std::pair<std::string, std::string>> merges;
    };
    const std::vector<Row> rows{
        {iemocap6_scheme(),
         {{"Sad", "Negative"},
          {"Angry", "Negative"},
          {"Frustrated", "Negative"},
          {"Neutral", "Neutral"},
          {"Happy", "Positive"},
          {"Excited", "Positive"}}},
        {iemocap4_scheme(), {{"Sad", "Negative"}, {"Angry", "Negative"}, {"Neutral", "Neutral"}, {"Happy", "Positive"}}},
        {mosei7_scheme(),
         {{"HighlyNegative", "Negative"},
          {"Negative", "Negative"},
          {"WeaklyNegative", "Negative"},
          {"Neutral", "Neutral"},
          {"WeaklyPositive", "Positive"},
          {"Positive", "Positive"},
          {"HighlyPositive", "Positive"}}},
    };
    for (const auto& row : rows) {
      CAPTURE(row.scheme.name);
      CHECK(row.scheme.num_emotions() == row.merges.size());
      for (const auto& [emotion, sentiment] : row.merges) {
        CAPTURE(emotion);
        const int e = row.scheme.emotion_index(emotion);
        CHECK(merge_emotion_to_sentiment(e, row.scheme) == row.scheme.sentiment_index(sentiment));
      }
      CHECK_THROWS_AS(merge_emotion_to_sentiment(static_cast<int>(row.scheme.num_emotions()), row.scheme),
                      VocabularyError);
      CHECK_THROWS_AS(merge_emotion_to_sentiment(-1, row.scheme), VocabularyError);
    }
    // MELD carries native sentiment labels; the fallback map is still total.
    const LabelScheme meld = meld_scheme();
    CHECK_NOTHROW(meld.validate());
    CHECK(meld.emotion_to_sentiment.size() == meld.num_emotions());
    CHECK(merge_emotion_to_sentiment(meld.emotion_index("Neutral"), meld) == meld.sentiment_index("Neutral"));
  }

  TEST_CASE("merge is total and idempotent on the sentiment vocabulary") {
    for (const auto& name : builtin_scheme_names()) {
      const LabelScheme s = builtin_scheme(name);
      CHECK_NOTHROW(s.validate());
      for (std::size_t e = 0; e < s.num_emotions(); ++e) {
        const int sent = merge_emotion_to_sentiment(static_cast<int>(e), s);
        CHECK(sent >= 0);
        CHECK(static_cast<std::size_t>(sent) < s.num_sentiments());
      }
    }
    // A scheme whose emotions are the sentiments maps each onto itself.
    const LabelScheme id = custom_scheme({"Negative", "Neutral", "Positive"}, {"Negative", "Neutral", "Positive"},
                                         {"Negative", "Neutral", "Positive"});
    for (int s = 0; s < 3; ++s) CHECK(merge_emotion_to_sentiment(merge_emotion_to_sentiment(s, id), id) == s);
    CHECK_THROWS_AS(custom_scheme({"A", "B"}, {"Negative", "Neutral", "Positive"}, {"Negative"}), ConfigError);
    CHECK_THROWS_AS(custom_scheme({"A"}, {"Negative", "Neutral", "Positive"}, {"Bad"}), ConfigError);
    CHECK_THROWS_AS(builtin_scheme("nope"), ConfigError);
  }

  TEST_CASE("intensity bins at the boundaries") {
    const std::vector<std::pair<double, IntensityBin>> cases{
        {-3.0, IntensityBin::HighlyNegative}, {-2.5, IntensityBin::HighlyNegative},
        {-2.0, IntensityBin::Negative},       {-1.0, IntensityBin::WeaklyNegative},
        {-0.5, IntensityBin::WeaklyNegative}, {0.0, IntensityBin::Neutral},
        {0.5, IntensityBin::WeaklyPositive},  {1.0, IntensityBin::WeaklyPositive},
        {2.0, IntensityBin::Positive},        {3.0, IntensityBin::HighlyPositive},
    };
    for (const auto& [x, bin] : cases) {
      CAPTURE(x);
      CHECK(bin_intensity(x) == static_cast<int>(bin));
    }
    CHECK(bin_intensity(-0.0) == static_cast<int>(IntensityBin::Neutral));
    CHECK_THROWS_AS(bin_intensity(-3.0000001), RangeError);
    CHECK_THROWS_AS(bin_intensity(3.0000001), RangeError);
    CHECK_THROWS_AS(bin_intensity(std::nan("")), RangeError);
    CHECK(collapse_intensity_bin(0) == 0);
    CHECK(collapse_intensity_bin(2) == 0);
    CHECK(collapse_intensity_bin(3) == 1);
    CHECK(collapse_intensity_bin(4) == 2);
    CHECK(collapse_intensity_bin(6) == 2);
  }

  TEST_CASE("intensity bins partition the range") {
    struct Interval {
      double lo, hi;
      bool lo_closed, hi_closed;
    };
    const Interval bins[7] = {{-3, -2, true, false}, {-2, -1, true, false}, {-1, 0, true, false}, {0, 0, true, true},
                              {0, 1, false, true},   {1, 2, false, true},   {2, 3, false, true}};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 10000; ++k) {
      const double x = k < 7 ? std::vector<double>{-3, -2, -1, 0, 1, 2, 3}[static_cast<std::size_t>(k)] : u(rng);
      int matched = -1;
      int matches = 0;
      for (int b = 0; b < 7; ++b) {
        const Interval& iv = bins[b];
        const bool above = iv.lo_closed ? x >= iv.lo : x > iv.lo;
        const bool below = iv.hi_closed ? x <= iv.hi : x < iv.hi;
        if (above && below) {
          ++matches;
          matched = b;
        }
      }
      REQUIRE(matches == 1);
      CHECK(bin_intensity(x) == matched);
    }
  }

  TEST_CASE("mosei scheme derives emotions from intensity") {
    const std::string text = R"({"id":"d","utterances":[{"id":"a","t":[1],"v":[1],"a":[1],"intensity":1.0},)"
                             R"({"id":"b","t":[1],"v":[1],"a":[1],"intensity":-2.5}]})";
    const Dataset ds = parse(text, mosei7_scheme());
    CHECK(ds.dialogues[0].utterances[0].emotion.value() == static_cast<int>(IntensityBin::WeaklyPositive));
    CHECK(ds.dialogues[0].utterances[0].sentiment.value() == 2);
    CHECK(ds.dialogues[0].utterances[1].emotion.value() == static_cast<int>(IntensityBin::HighlyNegative));
    CHECK(ds.dialogues[0].utterances[1].sentiment.value() == 0);
    std::ostringstream out;
    write_dataset(out, ds);
    CHECK(out.str() == canonical_lines(text));
  }

  TEST_CASE("dialogue-level split") {
    const Dataset ds = numbered(120);
    const auto [train, val] = split_train_val(ds, 0.1, 7);
    CHECK(train.dialogues.size() == 108);
    CHECK(val.dialogues.size() == 12);

    const auto [train2, val2] = split_train_val(ds, 0.1, 7);
    CHECK(ids_of(train) == ids_of(train2));
    CHECK(ids_of(val) == ids_of(val2));
  }

  TEST_CASE("split is a partition for any seed") {
    const Dataset ds = numbered(37);
    const auto all = ids_of(ds);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto [train, val] = split_train_val(ds, 0.3, seed);
      std::vector<std::string> merged = ids_of(train);
      const auto v = ids_of(val);
      merged.insert(merged.end(), v.begin(), v.end());
      std::sort(merged.begin(), merged.end());
      std::vector<std::string> expected = all;
      std::sort(expected.begin(), expected.end());
      CHECK(merged == expected);
      std::set<std::string> unique(merged.begin(), merged.end());
      CHECK(unique.size() == merged.size());
      // File order is kept inside each partition.
      for (const auto* part : {&train, &val}) {
        auto ids = ids_of(*part);
        std::vector<std::size_t> positions;
        for (const auto& id : ids) positions.push_back(static_cast<std::size_t>(std::stoul(id.substr(3))));
        CHECK(std::is_sorted(positions.begin(), positions.end()));
      }
    }
  }

  TEST_CASE("split rejects empty partitions") {
    const Dataset ds = numbered(4);
    CHECK_THROWS_AS(split_train_val(ds, 0.05, 0), ConfigError);
    CHECK_THROWS_AS(split_train_val(ds, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(split_train_val(ds, 1.0, 0), ConfigError);
  }
}

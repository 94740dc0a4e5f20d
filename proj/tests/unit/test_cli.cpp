#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "graphsmile/config.hpp"
#include "graphsmile/data_model.hpp"
#include "graphsmile/error.hpp"
#include "graphsmile/synthetic.hpp"
#include "json.hpp"

using namespace graphsmile;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = GRAPHSMILE_CONFIG_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("graphsmile_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The error object is the last line on stderr; log lines may precede it.
json error_json(const std::string& err) {
  std::string line, last;
  std::istringstream in(err);
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return json::parse(last);
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

// Small synthetic training run, a few seconds at most.
std::vector<std::string> quick_train(const fs::path& out) {
  return {"train",
          "-c",
          (kConfigs / "synthetic.cfg").string(),
          "-s",
          "gen.num_dialogues=6",
          "-s",
          "gen.utterances=5",
          "-s",
          "train.epochs=3",
          "-s",
          "data.val_fraction=0.34",
          "-o",
          out.string()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config text parsing") {
    const ConfigMap m = ConfigMap::parse("# header\nmodel.L = 7  # depth\n\ntrain.lr=3e-4\nmodel.L=5\n");
    CHECK(m.get("model.L") == "5");
    CHECK(m.get_int("model.L") == 5);
    CHECK(m.get_double("train.lr") == 3e-4);
    CHECK_THROWS_AS(ConfigMap::parse("model.L"), ConfigError);
    try {
      ConfigMap::parse("model.depth=3");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("model.depth") != std::string::npos);
      CHECK(msg.find("model.L") != std::string::npos);
      CHECK(msg.find("train.lambda_o") != std::string::npos);
    }
    ConfigMap d = ConfigMap::defaults();
    d.set("train.lr", "abc");
    CHECK_THROWS_AS(d.get_double("train.lr"), ConfigError);
    d.set("model.L", "-1");
    CHECK_THROWS_AS(d.get_size("model.L"), ConfigError);
    d.set("model.normalize_adjacency", "maybe");
    CHECK_THROWS_AS(d.get_bool("model.normalize_adjacency"), ConfigError);
    d.set("ablate.modes", "no_res, drop_t,,no_seg");
    CHECK(d.get_list("ablate.modes") == std::vector<std::string>{"no_res", "drop_t", "no_seg"});
  }

  TEST_CASE("defaults resolve into a valid run config") {
    const RunConfig rc = run_config_from(ConfigMap::defaults());
    CHECK(rc.lr == 1e-4);
    CHECK(rc.batch_size == 16);
    CHECK(rc.dim == 256);
    CHECK(rc.hidden == 256);
    CHECK(rc.future == rc.past);
    CHECK(rc.weight_decay == 1e-3);
    CHECK(rc.slope == 0.01);
    CHECK(rc.beta1 == 0.9);
    CHECK(rc.beta2 == 0.999);
    CHECK(rc.eps == 1e-8);
    CHECK_FALSE(rc.normalize_adjacency);
    CHECK(rc.epochs == 100);
    CHECK(rc.ablations.empty());
  }

  TEST_CASE("presets carry the published hyperparameters") {
    struct Row {
      const char* file;
      double lr;
      std::size_t bs;
      double dr;
      std::size_t l, p, b;
      double ls, lo;
    };
    const Row rows[] = {
        {"iemocap6.cfg", 1e-4, 16, 0.2, 7, 17, 19, 1.0, 0.7},
        {"iemocap4.cfg", 3e-4, 16, 0.2, 4, 5, 10, 0.6, 0.6},
        {"meld.cfg", 7e-5, 16, 0.2, 5, 3, 3, 0.5, 0.2},
        {"mosei7.cfg", 8e-5, 32, 0.4, 2, 5, 2, 0.8, 1.0},
    };
    for (const Row& r : rows) {
      CAPTURE(r.file);
      ConfigMap cfg = ConfigMap::defaults();
      cfg.merge(ConfigMap::load(kConfigs / r.file));
      const RunConfig rc = run_config_from(cfg);
      CHECK(rc.lr == r.lr);
      CHECK(rc.batch_size == r.bs);
      CHECK(rc.dropout == r.dr);
      CHECK(rc.depth == r.l);
      CHECK(rc.past == r.p);
      CHECK(rc.future == r.p);
      CHECK(rc.segment == r.b);
      CHECK(rc.lambda_s == r.ls);
      CHECK(rc.lambda_o == r.lo);
    }
  }

  TEST_CASE("run config round trip through the key registry") {
    RunConfig rc;
    rc.lr = 7e-5;
    rc.past = 3;
    rc.future = 1;
    rc.ablations = {Ablation::NoSeg, Ablation::DropA};
    rc.task = Task::MSAC;
    rc.lambda_o = 0.3;
    ConfigMap cfg = ConfigMap::defaults();
    store_run_config(rc, cfg);
    const RunConfig back = run_config_from(cfg);
    CHECK(back.lr == rc.lr);
    CHECK(back.past == 3);
    CHECK(back.future == 1);
    CHECK(back.ablations == rc.ablations);
    CHECK(back.task == Task::MSAC);
    CHECK(back.lambda_o == 0.3);
  }

  TEST_CASE("ablation consistency") {
    auto resolve = [](const std::string& modes, const std::string& task = "merc") {
      ConfigMap cfg = ConfigMap::defaults();
      cfg.set("ablation", modes);
      cfg.set("task", task);
      return run_config_from(cfg);
    };
    CHECK(resolve("drop_t,drop_v").ablations.size() == 2);
    CHECK_THROWS_AS(resolve("drop_t,drop_v,drop_a"), ConfigError);
    CHECK_THROWS_AS(resolve("no_res,no_fc_res"), ConfigError);
    CHECK_THROWS_AS(resolve("no_Le"), ConfigError);
    CHECK_NOTHROW(resolve("no_Le", "msac"));
    CHECK_THROWS_AS(resolve("no_Ls", "msac"), ConfigError);
    CHECK_THROWS_AS(resolve("bogus"), ConfigError);
  }

  TEST_CASE("label schemes from config") {
    ConfigMap cfg = ConfigMap::defaults();
    CHECK(label_scheme_from(cfg).name == "iemocap6");
    cfg.set("data.scheme", "synthetic");
    cfg.set("gen.num_emotions", "5");
    CHECK(label_scheme_from(cfg).num_emotions() == 5);
    cfg.set("data.scheme", "custom");
    cfg.set("scheme.emotions", "Calm,Upset");
    cfg.set("scheme.map", "Neutral,Negative");
    const LabelScheme s = label_scheme_from(cfg);
    CHECK(s.emotion_names == std::vector<std::string>{"Calm", "Upset"});
    CHECK(s.emotion_to_sentiment == std::vector<int>{1, 0});
    cfg.set("data.scheme", "imdb");
    CHECK_THROWS_AS(label_scheme_from(cfg), ConfigError);
  }

  TEST_CASE("gen writes a loadable dataset") {
    const fs::path dir = scratch("gen");
    const Run r = run_cli({"gen", "-s", "gen.num_dialogues=3", "-s", "gen.utterances=4", "-s", "gen.dims=2,3,4",
                           "-o", dir.string()});
    REQUIRE(r.code == 0);
    const Dataset ds = load_dataset(dir / "dataset.jsonl", synthetic_scheme(4));
    CHECK(ds.dialogues.size() == 3);
    CHECK(ds.utterance_count() == 12);
    CHECK(ds.dims == FeatureDims{2, 3, 4});
    CHECK(manifest(dir)["command"] == "gen");
  }

  TEST_CASE("dry run resolves the preset and records overrides") {
    const fs::path dir = scratch("dry");
    const Run r = run_cli({"train", "-c", (kConfigs / "iemocap6.cfg").string(), "-s", "model.P=9", "-s", "model.P=12",
                           "-s", "seed=5", "--dry-run", "-o", dir.string()});
    REQUIRE(r.code == 0);
    const json m = manifest(dir);
    CHECK(m["resolved"]["P"] == 12);
    CHECK(m["resolved"]["F"] == 12);
    CHECK(m["resolved"]["L"] == 7);
    CHECK(m["resolved"]["B"] == 19);
    CHECK(m["resolved"]["lr"] == 1e-4);
    CHECK(m["resolved"]["lambda_o"] == 0.7);
    CHECK(m["seed"] == 5);
    CHECK(m["overrides"] == json::array({"model.P=9", "model.P=12", "seed=5"}));
    CHECK(m["config"]["model.P"] == "12");
    CHECK_FALSE(fs::exists(dir / "metrics.csv"));
  }

  TEST_CASE("train writes its artifacts and the manifest replays the run") {
    const fs::path a = scratch("train_a");
    const Run first = run_cli(quick_train(a));
    REQUIRE(first.code == 0);
    for (const char* f : {"metrics.csv", "losses.csv", "confusion.csv", "checkpoint.json", "manifest.json"})
      CHECK(fs::exists(a / f));
    const std::string metrics = slurp(a / "metrics.csv");
    CHECK(metrics.rfind("epoch,split,accuracy,weighted_f1,total,excluded,f1_E0,f1_E1,f1_E2,f1_E3\n", 0) == 0);
    CHECK(metrics.find("\n3,val,") != std::string::npos);
    CHECK(metrics.find(",final,") != std::string::npos);
    CHECK(slurp(a / "losses.csv").rfind("epoch,L_e,L_s,L_o,decay,L_total\n", 0) == 0);

    const fs::path b = scratch("train_b");
    const Run replay = run_cli({"train", "-c", (a / "manifest.json").string(), "-o", b.string()});
    REQUIRE(replay.code == 0);
    CHECK(slurp(b / "metrics.csv") == metrics);
    CHECK(slurp(b / "losses.csv") == slurp(a / "losses.csv"));
    CHECK(slurp(b / "checkpoint.json") == slurp(a / "checkpoint.json"));

    SUBCASE("eval on the saved checkpoint reproduces the final row") {
      const fs::path e = scratch("eval");
      const Run ev = run_cli({"eval", "-c", (a / "manifest.json").string(), "-s",
                              "eval.checkpoint=" + (a / "checkpoint.json").string(), "-o", e.string()});
      REQUIRE(ev.code == 0);
      const std::string final_row = metrics.substr(metrics.find(",final,") + 7);
      const std::string eval_metrics = slurp(e / "metrics.csv");
      CHECK(eval_metrics.substr(eval_metrics.find(",final,") + 7) == final_row);
      CHECK(slurp(e / "confusion.csv") == slurp(a / "confusion.csv"));
    }
  }

  TEST_CASE("inspection commands") {
    const fs::path dir = scratch("inspect");
    const Run g = run_cli({"inspect-graph", "-s", "inspect.utterances=4", "-s", "model.P=1", "-s", "model.L=3", "-o",
                           dir.string()});
    REQUIRE(g.code == 0);
    const std::string edges = slurp(dir / "graph_edges.csv");
    CHECK(edges.rfind("pair,src_utt,src_modality,dst_utt,dst_modality,offset,weight\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : edges) lines += c == '\n';
    CHECK(lines == 1 + 3 * 20);
    CHECK(edges.find("tv,0,t,1,v,1,1\n") != std::string::npos);
    CHECK(g.out.find("A^1 nonzeros  intra[0,0]  inter[10,10]") != std::string::npos);
    CHECK(g.out.find("A^2 nonzeros") != std::string::npos);

    const Run s = run_cli({"inspect-shift", "-c", (kConfigs / "tiny.cfg").string(), "-o", dir.string()});
    REQUIRE(s.code == 0);
    const std::string pairs = slurp(dir / "shift_pairs.csv");
    CHECK(pairs.rfind("dialogue,segment,i,j,label,predicted,p_shift\n", 0) == 0);
    lines = 0;
    for (char c : pairs) lines += c == '\n';
    CHECK(lines == 1 + 8);
  }

  TEST_CASE("grad-check reports its verdict through the exit code") {
    const fs::path dir = scratch("gradcheck");
    const Run r = run_cli({"grad-check", "-c", (kConfigs / "tiny.cfg").string(), "-s", "seed=1", "-o", dir.string()});
    CHECK(r.out.find("max_relative_error=") != std::string::npos);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("grad-check passed", 0) == 0);
  }

  TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit");
    SUBCASE("unknown key is a config error listing the valid keys") {
      const Run r = run_cli({"train", "-s", "model.depth=3", "--dry-run", "-o", dir.string()});
      CHECK(r.code == 2);
      const json err = error_json(r.err);
      CHECK(err["error"] == "config");
      CHECK(err["exit_code"] == 2);
      CHECK(err["message"].get<std::string>().find("model.L") != std::string::npos);
    }
    SUBCASE("conflicting ablations") {
      CHECK(run_cli({"train", "-s", "ablation=no_res,no_fc_res", "--dry-run", "-o", dir.string()}).code == 2);
    }
    SUBCASE("missing config file") {
      CHECK(run_cli({"train", "-c", (dir / "absent.cfg").string(), "-o", dir.string()}).code == 2);
    }
    SUBCASE("bad command line") {
      CHECK(run_cli({"fly"}).code == 2);
      CHECK(run_cli({}).code == 2);
    }
    SUBCASE("missing dataset file") {
      const Run r = run_cli({"train", "-s", "data.path=" + (dir / "absent.jsonl").string(), "-o", dir.string()});
      CHECK(r.code == 3);
      CHECK(error_json(r.err)["error"] == "data");
    }
    SUBCASE("malformed dataset") {
      const fs::path data = dir / "broken.jsonl";
      std::ofstream(data) << "{\"id\": \"d\", \"utterances\": [\n";
      CHECK(run_cli({"train", "-s", "data.path=" + data.string(), "-o", dir.string()}).code == 3);
    }
    SUBCASE("unknown label") {
      const fs::path data = dir / "labels.jsonl";
      std::ofstream(data) << R"({"id":"d","utterances":[{"id":"u","t":[1],"v":[1],"a":[1],"emotion":"Bored"}]})"
                          << "\n";
      CHECK(run_cli({"train", "-s", "data.path=" + data.string(), "-o", dir.string()}).code == 3);
    }
    SUBCASE("non-finite loss") {
      const fs::path data = dir / "huge.jsonl";
      std::ofstream(data) << R"({"id":"d","utterances":[{"id":"u","t":[1e308],"v":[1e308],"a":[1e308],)"
                          << R"("emotion":"Sad"},{"id":"w","t":[1e308],"v":[1],"a":[1],"emotion":"Happy"}]})" << "\n";
      const Run r = run_cli({"train", "-s", "data.path=" + data.string(), "-s", "data.val_fraction=0", "-s",
                             "train.epochs=1", "-s", "model.D=4", "-o", dir.string()});
      CHECK(r.code == 4);
      CHECK(error_json(r.err)["error"] == "numeric");
    }
    SUBCASE("help") {
      CHECK(run_cli({"--help"}).code == 0);
      CHECK(run_cli({"train", "--help"}).code == 0);
    }
  }
}

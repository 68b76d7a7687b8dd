#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "streamad/cli.hpp"
#include "streamad/dataio.hpp"
#include "streamad/errors.hpp"

using namespace streamad;
using namespace streamad::cli;
namespace fs = std::filesystem;

namespace {

const std::string kSpike = STREAMAD_TEST_DATA "/sine_spike_100.csv";
const std::string kSpikeLabels = STREAMAD_TEST_DATA "/sine_spike_100.labels.json";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("streamad_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

struct Invocation {
  int rc = 0;
  std::string out, err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = run(args, out, err);
  return {rc, out.str(), err.str()};
}

std::string setting(const Preset& p, const std::string& key) {
  for (const auto& [k, v] : p.settings) {
    if (k == key) return v;
  }
  return "<missing>";
}

}  // namespace

TEST_CASE("table4 preset holds the RePAD reference settings", "[cli][presets]") {
  const Preset* p = find_preset("table4");
  REQUIRE(p != nullptr);
  CHECK(setting(*p, "look_back") == "3");
  CHECK(setting(*p, "predict_forward") == "1");
  CHECK(setting(*p, "hidden_size") == "10");
  CHECK(setting(*p, "epochs") == "50");
  CHECK(setting(*p, "learning_rate") == "0.005");
  CHECK(setting(*p, "activation") == "tanh");
  CHECK(setting(*p, "seed") == "140");

  RunSpec spec;
  spec.preset = "table4";
  const RunConfig c = resolve(spec);
  CHECK(c.detection.look_back == 3);
  CHECK(c.detection.hidden_size == 10);
  CHECK(c.detection.backend.epochs == 50);
  CHECK(c.detection.backend.learning_rate == 0.005);
  CHECK(c.detection.backend.seed == 140);
}

TEST_CASE("table5 presets hold the SALAD reference settings", "[cli][presets]") {
  RunSpec spec;
  spec.algorithm = Algorithm::salad;
  spec.preset = "table5_nyc";
  RunConfig c = resolve(spec);
  CHECK(c.salad.conversion_look_back == 288);
  CHECK(c.salad.conversion_backend.epochs == 100);
  CHECK(c.salad.conversion_backend.learning_rate == 0.001);
  CHECK(c.salad.detection.look_back == 3);
  CHECK(c.salad.detection.backend.epochs == 50);
  CHECK(c.salad.detection.backend.learning_rate == 0.001);
  CHECK(c.salad.conversion_backend.seed == 140);

  spec.preset = "table5_tmrt";
  c = resolve(spec);
  CHECK(c.salad.conversion_look_back == 63);
  CHECK(c.salad.conversion_backend.epochs == 100);
  CHECK(find_preset("table99") == nullptr);
}

TEST_CASE("presets command prints every expansion", "[cli][presets]") {
  const Invocation r = invoke({"presets"});
  CHECK(r.rc == kExitOk);
  for (const char* s : {"table4", "table5_nyc", "table5_tmrt", "conversion_look_back=288", "conversion_look_back=63",
                        "learning_rate=0.005", "activation=tanh", "seed=140"}) {
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring(s));
  }
}

TEST_CASE("overrides win over the preset, key by key", "[cli][config]") {
  RunSpec spec;
  spec.preset = "table4";
  spec.overrides = {{"epochs", "7"}, {"init_scheme", "normal_scaled"}, {"epochs", "9"}};
  spec.seed = 5;
  spec.k = 3;
  const RunConfig c = resolve(spec);
  CHECK(c.detection.backend.epochs == 9);
  CHECK(c.detection.backend.init_scheme == InitScheme::normal_scaled);
  CHECK(c.detection.backend.learning_rate == 0.005);
  CHECK(c.detection.backend.seed == 5);
  CHECK(c.salad.conversion_backend.seed == 5);
  CHECK(c.k == 3);
}

TEST_CASE("setting validation", "[cli][config]") {
  RunConfig c;
  CHECK_THROWS_AS(apply_setting(c, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "epochs", "many"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "activation", "relu"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "hidden_layers", "2"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "init_scheme", "xavier"), ConfigError);
  apply_setting(c, "conversion_look_back", "50");
  CHECK(c.salad.conversion_look_back == 50);
  apply_setting(c, "optimizer", "adam");
  CHECK(c.detection.backend.optimizer == Optimizer::adam);
  CHECK(c.salad.detection.backend.optimizer == Optimizer::adam);
  CHECK(c.salad.conversion_backend.optimizer == Optimizer::sgd);
  for (const std::string& key : setting_keys()) CHECK_FALSE(key.empty());

  RunSpec bad;
  bad.overrides = {{"look_back", "1"}};
  CHECK_THROWS_AS(resolve(bad), ConfigError);
  bad.overrides.clear();
  bad.preset = "table99";
  CHECK_THROWS_AS(resolve(bad), ConfigError);
}

TEST_CASE("run writes outputs and reports the spike", "[cli][run]") {
  const fs::path out = scratch_dir("run");
  const Invocation r = invoke({"run", "--preset", "table4", "--input", kSpike, "--labels", kSpikeLabels, "--out",
                               out.string()});
  REQUIRE(r.rc == kExitOk);
  CHECK(r.err.empty());
  CHECK(fs::exists(out / "verdicts.csv"));
  CHECK(fs::exists(out / "plot.csv"));
  const ReportDocument doc = load_report(out / "report.json");
  CHECK(doc.metrics.tp == 1);
  CHECK(doc.metrics.fp == 0);
  CHECK(doc.metrics.recall == 1.0);
  CHECK(doc.metrics.k == 7);
  CHECK(doc.metrics.total_points == 100);
  CHECK(doc.metrics.training_ratio > 0.0);
  CHECK(doc.config["algorithm"] == "repad");
}

TEST_CASE("repeated runs give identical metrics", "[cli][run]") {
  RunSpec spec;
  spec.preset = "table4";
  spec.input = kSpike;
  spec.labels = kSpikeLabels;
  std::ostringstream out, err;
  const fs::path first = scratch_dir("repeat_a");
  const fs::path second = scratch_dir("repeat_b");
  spec.out_dir = first;
  REQUIRE(cmd_run(spec, out, err) == kExitOk);
  spec.out_dir = second;
  REQUIRE(cmd_run(spec, out, err) == kExitOk);
  auto a = load_report(first / "report.json").metrics;
  auto b = load_report(second / "report.json").metrics;
  CHECK(a.tp == b.tp);
  CHECK(a.fp == b.fp);
  CHECK(a.retrain_count == b.retrain_count);
  CHECK(a.flagged_points == b.flagged_points);
  a.timing = b.timing;
  CHECK(a == b);
}

TEST_CASE("salad runs through the CLI", "[cli][run]") {
  const fs::path out = scratch_dir("salad");
  const Invocation r = invoke({"run", "--algorithm", "salad", "--preset", "table5_tmrt", "--set",
                               "conversion_look_back=20", "--set", "conversion_epochs=20", "--input", kSpike, "--out",
                               out.string()});
  REQUIRE(r.rc == kExitOk);
  const ReportDocument doc = load_report(out / "report.json");
  CHECK(doc.config["algorithm"] == "salad");
  CHECK(doc.extra.contains("conversion_retrain_count"));
  CHECK(doc.metrics.total_points == 100);
}

TEST_CASE("exit codes", "[cli][errors]") {
  const std::string out = scratch_dir("codes").string();
  SECTION("missing input is an I/O failure") {
    const Invocation r = invoke({"run", "--input", "/nonexistent/series.csv", "--out", out});
    CHECK(r.rc == kExitIo);
    CHECK_FALSE(r.err.empty());
  }
  SECTION("missing labels is an I/O failure") {
    CHECK(invoke({"run", "--input", kSpike, "--labels", "/nonexistent/l.json", "--out", out}).rc == kExitIo);
  }
  SECTION("look_back=1 is a config error") {
    const Invocation r = invoke({"run", "--input", kSpike, "--set", "look_back=1", "--out", out});
    CHECK(r.rc == kExitConfig);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("look_back"));
  }
  SECTION("malformed --set is a config error") {
    CHECK(invoke({"run", "--input", kSpike, "--set", "look_back", "--out", out}).rc == kExitConfig);
  }
  SECTION("unknown flag is a config error") {
    CHECK(invoke({"run", "--input", kSpike, "--bogus", "--out", out}).rc == kExitConfig);
  }
  SECTION("a diverging forecaster is a numeric error") {
    const Invocation r = invoke({"run", "--input", kSpike, "--preset", "table4", "--set", "learning_rate=1e300",
                                 "--out", out});
    CHECK(r.rc == kExitNumeric);
    CHECK_FALSE(r.err.empty());
  }
  SECTION("labels beyond the series are rejected") {
    const fs::path dir = scratch_dir("codes_labels");
    fs::create_directories(dir);
    write_text_file(dir / "l.json", R"({"points":[100],"collectives":[]})");
    CHECK(invoke({"run", "--input", kSpike, "--labels", (dir / "l.json").string(), "--out", out}).rc == kExitIo);
  }
  SECTION("a single compare spec is a config error") {
    CHECK(invoke({"compare", "--input", kSpike, "--run", "only", "--out", out}).rc == kExitConfig);
  }
  SECTION("duplicate compare names are a config error") {
    CHECK(invoke({"compare", "--input", kSpike, "--run", "a", "--run", "a", "--out", out}).rc == kExitConfig);
  }
}

TEST_CASE("compare writes one row per spec in order", "[cli][compare]") {
  const fs::path out = scratch_dir("compare");
  const Invocation r = invoke({"compare", "--preset", "table4", "--input", kSpike, "--labels", kSpikeLabels, "--out",
                               out.string(), "--run", "uniform:init_scheme=uniform_scaled", "--run",
                               "normal:init_scheme=normal_scaled", "--run", "again:init_scheme=uniform_scaled"});
  REQUIRE(r.rc == kExitOk);
  const auto doc = nlohmann::json::parse(read_text_file(out / "comparison.json"));
  REQUIRE(doc["runs"].size() == 3);
  CHECK(doc["runs"][0]["name"] == "uniform");
  CHECK(doc["runs"][1]["name"] == "normal");
  CHECK(doc["runs"][2]["name"] == "again");
  CHECK(doc["runs"][1]["config"]["detector"]["backend"]["init_scheme"] == "normal_scaled");
  for (const char* name : {"uniform", "normal", "again"}) CHECK(fs::exists(out / name / "verdicts.csv"));

  auto strip = [](nlohmann::json m) {
    for (const char* key : {"adt_nt_mean", "adt_nt_std", "adt_t_mean", "adt_t_std"}) m.erase(key);
    return m;
  };
  CHECK(strip(doc["runs"][0]["metrics"]) == strip(doc["runs"][2]["metrics"]));

  const std::string table = read_text_file(out / "comparison.txt");
  CHECK(table == r.out);
  std::istringstream lines(table);
  std::string header;
  std::getline(lines, header);
  for (const char* col : {"name", "precision", "recall", "fscore", "training_ratio", "adt_nt", "adt_t"}) {
    CHECK_THAT(header, Catch::Matchers::ContainsSubstring(col));
  }
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("comparison table layout", "[cli][compare]") {
  MetricsReport m;
  m.precision = 0.957;
  m.recall = 0.9;
  m.fscore = 0.928;
  m.training_ratio = 0.0094;
  const std::string t = render_comparison_table({{"tfk-like", m}, {"b", m}});
  CHECK_THAT(t, Catch::Matchers::ContainsSubstring("0.957"));
  CHECK_THAT(t, Catch::Matchers::ContainsSubstring("0.0094"));
}

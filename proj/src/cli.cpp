#include "streamad/cli.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "streamad/errors.hpp"

namespace streamad::cli {

namespace {

template <typename Int>
Int parse_unsigned(const std::string& key, const std::string& text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("setting '" + key + "': '" + text + "' is not a non-negative integer");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    throw ConfigError("setting '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& text, std::optional<Enum> parsed) {
  if (!parsed) throw ConfigError("setting '" + key + "': unknown value '" + text + "'");
  return *parsed;
}

bool apply_backend_setting(BackendConfig& b, const std::string& key, const std::string& name,
                           const std::string& value) {
  if (name == "epochs") {
    b.epochs = parse_unsigned<std::size_t>(key, value);
  } else if (name == "learning_rate") {
    b.learning_rate = parse_real(key, value);
  } else if (name == "seed") {
    b.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (name == "init_scheme") {
    b.init_scheme = parse_enum(key, value, parse_init_scheme(value));
  } else if (name == "optimizer") {
    b.optimizer = parse_enum(key, value, parse_optimizer(value));
  } else if (name == "adam_epsilon") {
    b.adam_epsilon = parse_real(key, value);
  } else if (name == "scaling") {
    b.scaling = parse_enum(key, value, parse_scaling(value));
  } else {
    return false;
  }
  return true;
}

void check_fixed(const std::string& key, const std::string& value, const std::string& only) {
  if (value != only) throw ConfigError("setting '" + key + "': only '" + only + "' is supported");
}

nlohmann::json backend_json(const BackendConfig& b) {
  return {{"init_scheme", to_string(b.init_scheme)},
          {"optimizer", to_string(b.optimizer)},
          {"learning_rate", b.learning_rate},
          {"epochs", b.epochs},
          {"seed", b.seed},
          {"adam_epsilon", b.adam_epsilon},
          {"scaling", to_string(b.scaling)},
          {"activation", "tanh"}};
}

nlohmann::json detector_json(const DetectorConfig& d) {
  return {{"look_back", d.look_back},
          {"predict_forward", d.predict_forward},
          {"hidden_layers", 1},
          {"hidden_size", d.hidden_size},
          {"epsilon_denominator", d.epsilon_denominator},
          {"backend", backend_json(d.backend)}};
}

struct LoadedInput {
  TimeSeries series;
  LabelSet labels;
};

LoadedInput load_input(const RunSpec& spec) {
  TimeSeries base = load_csv(spec.input);
  LabelSet labels;
  if (spec.labels) {
    labels = load_labels(*spec.labels);
    check_labels_in_range(labels, base.size());
  }
  if (spec.duplicate_n == 0) throw ConfigError("--duplicate must be >= 1");
  LoadedInput in{duplicate(base, spec.duplicate_n), label_tile(labels, base.size(), spec.duplicate_n)};
  in.labels.normalize();
  return in;
}

// Runs `body`, translating library errors into exit codes.
template <typename Body>
int guarded(std::ostream& err, const std::string& context, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << context << ": configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericOverflowError& e) {
    err << context << ": numeric overflow: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << context << ": I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << context << ": input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ContractError& e) {
    err << context << ": input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << context << ": error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::vector<Setting> parse_set_flags(const std::vector<std::string>& raw) {
  std::vector<Setting> out;
  for (const std::string& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "repad") return Algorithm::repad;
  if (text == "salad") return Algorithm::salad;
  throw ConfigError("unknown algorithm '" + text + "' (expected repad or salad)");
}

// "name[:key=value,key=value...]" on top of a base spec. `algorithm` and
// `preset` are accepted as keys alongside the config settings.
RunSpec parse_run_variant(const RunSpec& base, const std::string& text) {
  RunSpec spec = base;
  const auto colon = text.find(':');
  spec.name = text.substr(0, colon);
  if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos || spec.name == "." ||
      spec.name == "..") {
    throw ConfigError("--run needs a plain name, got '" + text + "'");
  }
  if (colon == std::string::npos) return spec;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--run item '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "algorithm") {
      spec.algorithm = parse_algorithm(value);
    } else if (key == "preset") {
      spec.preset = value;
    } else {
      spec.overrides.emplace_back(key, value);
    }
  }
  return spec;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::repad ? "repad" : "salad"; }

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    const std::vector<Setting> detection_table4 = {
        {"look_back", "3"},  {"predict_forward", "1"},   {"hidden_layers", "1"}, {"hidden_size", "10"},
        {"epochs", "50"},    {"learning_rate", "0.005"}, {"activation", "tanh"}, {"seed", "140"},
    };
    auto table5 = [](const std::string& conversion_look_back) {
      return std::vector<Setting>{
          {"conversion_look_back", conversion_look_back},
          {"conversion_predict_forward", "1"},
          {"conversion_hidden_layers", "1"},
          {"conversion_hidden_size", "10"},
          {"conversion_epochs", "100"},
          {"conversion_learning_rate", "0.001"},
          {"conversion_activation", "tanh"},
          {"conversion_seed", "140"},
          {"look_back", "3"},
          {"predict_forward", "1"},
          {"hidden_layers", "1"},
          {"hidden_size", "10"},
          {"epochs", "50"},
          {"learning_rate", "0.001"},
          {"activation", "tanh"},
          {"seed", "140"},
      };
    };
    return std::vector<Preset>{
        {"table4", "RePAD hyperparameters", detection_table4},
        {"table5_nyc", "SALAD hyperparameters, NYC taxi series", table5("288")},
        {"table5_tmrt", "SALAD hyperparameters, TMRT series", table5("63")},
    };
  }();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> keys = {"look_back", "predict_forward", "hidden_layers", "hidden_size",
                                   "activation", "epsilon_denominator", "epochs", "learning_rate",
                                   "seed", "init_scheme", "optimizer", "adam_epsilon", "scaling"};
  const std::size_t detection_keys = keys.size();
  for (std::size_t i = 0; i < detection_keys; ++i) {
    if (keys[i] != "epsilon_denominator") keys.push_back("conversion_" + keys[i]);
  }
  keys.push_back("k");
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "k") {
    config.k = static_cast<std::int64_t>(parse_unsigned<std::uint32_t>(key, value));
    return;
  }
  const bool conversion = key.starts_with("conversion_");
  const std::string name = conversion ? key.substr(std::string("conversion_").size()) : key;

  if (conversion) {
    SaladConfig& s = config.salad;
    if (name == "look_back") {
      s.conversion_look_back = parse_unsigned<std::size_t>(key, value);
    } else if (name == "predict_forward") {
      check_fixed(key, value, "1");
    } else if (name == "hidden_layers") {
      check_fixed(key, value, "1");
    } else if (name == "hidden_size") {
      s.conversion_hidden_size = parse_unsigned<std::size_t>(key, value);
    } else if (name == "activation") {
      check_fixed(key, value, "tanh");
    } else if (!apply_backend_setting(s.conversion_backend, key, name, value)) {
      throw ConfigError("unknown setting '" + key + "'");
    }
    return;
  }

  // Detection settings feed both the RePAD detector and SALAD's detection phase.
  for (DetectorConfig* d : {&config.detection, &config.salad.detection}) {
    if (name == "look_back") {
      d->look_back = parse_unsigned<std::size_t>(key, value);
    } else if (name == "predict_forward") {
      d->predict_forward = parse_unsigned<std::size_t>(key, value);
    } else if (name == "hidden_layers") {
      check_fixed(key, value, "1");
    } else if (name == "hidden_size") {
      d->hidden_size = parse_unsigned<std::size_t>(key, value);
    } else if (name == "activation") {
      check_fixed(key, value, "tanh");
    } else if (name == "epsilon_denominator") {
      d->epsilon_denominator = parse_real(key, value);
    } else if (!apply_backend_setting(d->backend, key, name, value)) {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
}

RunConfig resolve(const RunSpec& spec) {
  RunConfig config;
  if (spec.preset) {
    const Preset* preset = find_preset(*spec.preset);
    if (!preset) throw ConfigError("unknown preset '" + *spec.preset + "'");
    for (const auto& [key, value] : preset->settings) apply_setting(config, key, value);
  }
  for (const auto& [key, value] : spec.overrides) apply_setting(config, key, value);
  if (spec.seed) {
    config.detection.backend.seed = *spec.seed;
    config.salad.detection.backend.seed = *spec.seed;
    config.salad.conversion_backend.seed = *spec.seed;
  }
  if (spec.k) config.k = spec.k;
  if (config.k && *config.k < 0) throw ConfigError("k must be non-negative");

  if (spec.algorithm == Algorithm::repad) {
    config.detection.validate();
  } else {
    config.salad.validate();
  }
  return config;
}

RunOutcome execute(const RunSpec& spec, const RunConfig& config, const TimeSeries& series, const LabelSet& labels) {
  RunOutcome outcome;
  outcome.rows.reserve(series.size());
  std::vector<std::int64_t> flagged;
  std::vector<PointVerdict> scored;
  scored.reserve(series.size());
  std::size_t retrains = 0;
  nlohmann::json extra = nlohmann::json::object();

  if (spec.algorithm == Algorithm::repad) {
    RepadDetector detector(config.detection);
    for (const DataPoint& p : series.points) {
      PointVerdict v = detector.step(p.timestamp, p.value);
      if (v.is_anomaly) flagged.push_back(static_cast<std::int64_t>(v.index));
      outcome.rows.push_back(to_row(v));
      scored.push_back(std::move(v));
    }
    retrains = detector.state().retrain_count;
  } else {
    SaladDetector detector(config.salad);
    StreamingStats conversion_time, detection_time;
    for (const DataPoint& p : series.points) {
      SaladVerdict v = detector.step(p.timestamp, p.value);
      if (v.is_anomaly()) flagged.push_back(static_cast<std::int64_t>(v.index));
      outcome.rows.push_back(to_row(v));
      conversion_time.add(v.elapsed_conversion_seconds);
      if (v.inner_verdict) {
        detection_time.add(v.elapsed_detection_seconds);
        scored.push_back(*v.inner_verdict);
      }
    }
    retrains = detector.inner().state().retrain_count;
    const std::size_t conv_retrains = detector.state().conversion_retrain_count;
    extra["conversion_retrain_count"] = conv_retrains;
    extra["conversion_training_ratio"] = series.size() == 0 ? 0.0 : training_ratio(conv_retrains, series.size());
    extra["conversion_time_mean"] = conversion_time.mean();
    extra["conversion_time_std"] = conversion_time.stddev();
    extra["detection_time_mean"] = detection_time.mean();
    extra["detection_time_std"] = detection_time.stddev();
    extra["aare_emitted"] = detection_time.count();
  }

  const std::int64_t k =
      config.k.value_or(series.interval_seconds > 0.0 ? choose_k(series.interval_seconds) : MatchPolicy{}.k);
  outcome.report.metrics = series.size() == 0
                               ? MetricsReport{}
                               : evaluate(labels, flagged, MatchPolicy{k}, retrains, series.size(), scored);
  outcome.report.metrics.k = k;
  outcome.report.extra = extra;

  nlohmann::json echo;
  echo["name"] = spec.name;
  echo["algorithm"] = to_string(spec.algorithm);
  echo["input"] = spec.input.string();
  echo["labels"] = spec.labels ? nlohmann::json(spec.labels->string()) : nlohmann::json(nullptr);
  echo["preset"] = spec.preset ? nlohmann::json(*spec.preset) : nlohmann::json(nullptr);
  nlohmann::json overrides = nlohmann::json::array();
  for (const auto& [key, value] : spec.overrides) overrides.push_back({key, value});
  echo["overrides"] = overrides;
  echo["duplicate"] = spec.duplicate_n;
  echo["k"] = k;
  echo["k_source"] = config.k ? "override" : "interval";
  echo["series"] = {{"name", series.name},
                    {"points", series.size()},
                    {"interval_seconds", series.interval_seconds},
                    {"irregular_interval", series.irregular_interval}};
  if (spec.algorithm == Algorithm::repad) {
    echo["detector"] = detector_json(config.detection);
  } else {
    echo["conversion"] = {{"look_back", config.salad.conversion_look_back},
                          {"predict_forward", 1},
                          {"hidden_layers", 1},
                          {"hidden_size", config.salad.conversion_hidden_size},
                          {"backend", backend_json(config.salad.conversion_backend)}};
    echo["detector"] = detector_json(config.salad.detection);
  }
  outcome.report.config = echo;
  return outcome;
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  RunConfig config;
  if (int rc = guarded(err, spec.name, [&] {
        config = resolve(spec);
        return kExitOk;
      });
      rc != kExitOk) {
    return rc;
  }

  LoadedInput input;
  if (int rc = guarded(err, spec.name, [&] {
        input = load_input(spec);
        return kExitOk;
      });
      rc != kExitOk) {
    return rc;
  }

  return guarded(err, spec.name, [&] {
    const RunOutcome outcome = execute(spec, config, input.series, input.labels);
    write_outputs(outcome.rows, outcome.report, spec.out_dir);
    const MetricsReport& m = outcome.report.metrics;
    out << spec.name << ": " << input.series.size() << " points, tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn
        << " precision=" << format_double(m.precision) << " recall=" << format_double(m.recall)
        << " fscore=" << format_double(m.fscore) << " training_ratio=" << format_double(m.training_ratio)
        << " -> " << spec.out_dir.string() << '\n';
    return kExitOk;
  });
}

std::string render_comparison_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t name_width = 4;
  for (const auto& [name, m] : rows) name_width = std::max(name_width, name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_width)) << "name" << std::right;
  for (const char* col : {"precision", "recall", "fscore", "training_ratio", "adt_nt", "adt_t"}) {
    os << "  " << std::setw(14) << col;
  }
  os << '\n';
  os << std::fixed;
  for (const auto& [name, m] : rows) {
    os << std::left << std::setw(static_cast<int>(name_width)) << name << std::right;
    os << "  " << std::setw(14) << std::setprecision(3) << m.precision;
    os << "  " << std::setw(14) << std::setprecision(3) << m.recall;
    os << "  " << std::setw(14) << std::setprecision(3) << m.fscore;
    os << "  " << std::setw(14) << std::setprecision(4) << m.training_ratio;
    os << "  " << std::setw(14) << std::setprecision(6) << m.timing.adt_nt_mean;
    os << "  " << std::setw(14) << std::setprecision(6) << m.timing.adt_t_mean;
    os << '\n';
  }
  return os.str();
}

int cmd_compare(const std::vector<RunSpec>& specs, const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err) {
  if (specs.size() < 2) {
    err << "compare: at least two runs are required\n";
    return kExitConfig;
  }
  std::set<std::string> names;
  for (const RunSpec& s : specs) {
    if (!names.insert(s.name).second) {
      err << "compare: duplicate run name '" << s.name << "'\n";
      return kExitConfig;
    }
  }

  std::vector<RunConfig> configs(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (int rc = guarded(err, specs[i].name, [&] {
          configs[i] = resolve(specs[i]);
          return kExitOk;
        });
        rc != kExitOk) {
      return rc;
    }
  }

  // Shared input: every spec reads the same series and labels.
  LoadedInput input;
  if (int rc = guarded(err, "compare", [&] {
        input = load_input(specs.front());
        return kExitOk;
      });
      rc != kExitOk) {
    return rc;
  }

  std::vector<std::pair<std::string, MetricsReport>> table;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const RunSpec& spec = specs[i];
    // Sequential on purpose: detection timings must not contend.
    const int rc = guarded(err, spec.name, [&] {
      const RunOutcome outcome = execute(spec, configs[i], input.series, input.labels);
      write_outputs(outcome.rows, outcome.report, out_dir / spec.name);
      table.emplace_back(spec.name, outcome.report.metrics);
      runs.push_back({{"name", spec.name},
                      {"metrics", metrics_to_json(outcome.report.metrics)},
                      {"config", outcome.report.config},
                      {"extra", outcome.report.extra}});
      return kExitOk;
    });
    if (rc != kExitOk) return rc;
  }

  return guarded(err, "compare", [&] {
    const std::string rendered = render_comparison_table(table);
    nlohmann::json doc = {{"schema_version", kReportSchemaVersion}, {"runs", runs}};
    write_text_file(out_dir / "comparison.json", doc.dump(2) + "\n");
    write_text_file(out_dir / "comparison.txt", rendered);
    out << rendered;
    return kExitOk;
  });
}

int cmd_presets(std::ostream& out) {
  for (const Preset& p : presets()) {
    out << p.name << "  (" << p.description << ")\n";
    for (const auto& [key, value] : p.settings) out << "  " << key << '=' << value << '\n';
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming time-series anomaly detection (RePAD / SALAD) with a benchmark harness", "streamad"};
  app.require_subcommand(1);

  RunSpec base;
  std::string algorithm = "repad";
  std::string input, labels, preset, out_dir = "out";
  std::vector<std::string> sets, variants;
  std::size_t duplicate_n = 1;
  std::int64_t k = -1;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--algorithm", algorithm, "repad or salad")->check(CLI::IsMember({"repad", "salad"}));
    cmd->add_option("--input", input, "CSV with header timestamp,value")->required();
    cmd->add_option("--labels", labels, "JSON label file");
    cmd->add_option("--preset", preset, "table4, table5_nyc or table5_tmrt");
    cmd->add_option("--set", sets, "override key=value (repeatable)");
    cmd->add_option("--duplicate", duplicate_n, "concatenate N copies of the series")->check(CLI::PositiveNumber);
    cmd->add_option("--k", k, "window slack K (default: from the sampling interval)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed for every forecaster");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one detector on one series");
  add_common(run_cmd);
  CLI::App* compare_cmd = app.add_subcommand("compare", "run several configurations on the same series");
  add_common(compare_cmd);
  compare_cmd->add_option("--run", variants, "NAME[:key=value,...] (repeatable, at least two)");
  CLI::App* presets_cmd = app.add_subcommand("presets", "print every preset");

  std::vector<const char*> argv;
  argv.push_back("streamad");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (presets_cmd->parsed()) return cmd_presets(out);

  const CLI::App* active = run_cmd->parsed() ? run_cmd : compare_cmd;
  const int rc = guarded(err, active->get_name(), [&] {
    base.algorithm = parse_algorithm(algorithm);
    base.input = input;
    if (!labels.empty()) base.labels = labels;
    if (!preset.empty()) base.preset = preset;
    base.overrides = parse_set_flags(sets);
    base.duplicate_n = duplicate_n;
    if (k >= 0) base.k = k;
    if (active->count("--seed") > 0) base.seed = seed;
    base.out_dir = out_dir;
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  if (run_cmd->parsed()) return cmd_run(base, out, err);

  std::vector<RunSpec> specs;
  const int parse_rc = guarded(err, "compare", [&] {
    for (const std::string& v : variants) specs.push_back(parse_run_variant(base, v));
    return kExitOk;
  });
  if (parse_rc != kExitOk) return parse_rc;
  return cmd_compare(specs, base.out_dir, out, err);
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace streamad::cli

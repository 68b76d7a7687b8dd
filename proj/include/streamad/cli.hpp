#pragma once

// Command-line front end: `run`, `compare` and `presets`. The functions here
// are also the programmatic entry points used by the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamad/dataio.hpp"
#include "streamad/repad.hpp"
#include "streamad/salad.hpp"

namespace streamad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

enum class Algorithm { repad, salad };
std::string_view to_string(Algorithm algorithm);

using Setting = std::pair<std::string, std::string>;

struct Preset {
  std::string name;
  std::string description;
  std::vector<Setting> settings;
};

// table4, table5_nyc, table5_tmrt.
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

// Everything a detector run needs besides the data.
struct RunConfig {
  DetectorConfig detection{};
  SaladConfig salad{};
  std::optional<std::int64_t> k;
};

// Applies one `key=value` setting. Unprefixed keys configure the RePAD
// detector (and SALAD's detection phase); `conversion_*` keys configure
// SALAD's conversion phase. Throws ConfigError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> setting_keys();

struct RunSpec {
  std::string name = "run";
  Algorithm algorithm = Algorithm::repad;
  std::filesystem::path input;
  std::optional<std::filesystem::path> labels;
  std::optional<std::string> preset;
  std::vector<Setting> overrides;  // applied after the preset, in order
  std::size_t duplicate_n = 1;
  std::optional<std::int64_t> k;
  std::optional<std::uint64_t> seed;  // shorthand for seed + conversion_seed
  std::filesystem::path out_dir = "out";
};

// Preset, then overrides, then --seed/--k; validates. Throws ConfigError.
RunConfig resolve(const RunSpec& spec);

struct RunOutcome {
  ReportDocument report;
  std::vector<VerdictRow> rows;
};

// Streams `series` through the configured detector and scores it. No I/O.
RunOutcome execute(const RunSpec& spec, const RunConfig& config, const TimeSeries& series, const LabelSet& labels);

// Loads, duplicates, runs, scores and writes outputs. Returns an exit code;
// diagnostics go to `err`.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

// Sequentially runs every spec on the shared input; writes per-run outputs
// under out_dir/<name>/ plus comparison.json and comparison.txt.
int cmd_compare(const std::vector<RunSpec>& specs, const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err);

int cmd_presets(std::ostream& out);

// Fixed-width comparison table, one row per run in input order.
std::string render_comparison_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace streamad::cli

#pragma once

// Series and label ingestion, long-run construction by duplication, and the
// run outputs (verdicts.csv, report.json, plot.csv).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "streamad/metrics.hpp"
#include "streamad/repad.hpp"
#include "streamad/salad.hpp"
#include "streamad/timestamp.hpp"

namespace streamad {

struct DataPoint {
  Timestamp timestamp;
  double value = 0.0;

  bool operator==(const DataPoint&) const = default;
};

struct TimeSeries {
  std::string name;
  double interval_seconds = 0.0;
  std::vector<DataPoint> points;
  // Set when some gap deviates from the median gap by more than 1%.
  bool irregular_interval = false;

  std::size_t size() const noexcept { return points.size(); }
  std::vector<double> values() const;

  bool operator==(const TimeSeries&) const = default;
};

// Two-column CSV with header "timestamp,value"; LF or CRLF line ends.
// Throws IoError, ParseError (with line number), ContractError (timestamps not
// strictly increasing).
TimeSeries load_csv(const std::filesystem::path& path);
TimeSeries parse_csv(const std::string& text, const std::string& name);
void write_csv(const TimeSeries& series, const std::filesystem::path& path);

// Concatenates n copies; copy k is shifted by k * (span + interval) so the
// timestamps keep advancing at the series interval.
TimeSeries duplicate(const TimeSeries& series, std::size_t n);

// Replicates every label at offsets k * series_len, k = 0..n-1.
LabelSet label_tile(const LabelSet& labels, std::size_t series_len, std::size_t n);

// {"points": [int...], "collectives": [[start, end]...]}; other keys are
// ignored. Throws IoError or ParseError naming the offending key.
LabelSet load_labels(const std::filesystem::path& path);
LabelSet parse_labels(const std::string& text);

// Throws ContractError if a label lies outside [0, series_len).
void check_labels_in_range(const LabelSet& labels, std::size_t series_len);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// One output row; RePAD and SALAD verdicts both flatten to this.
struct VerdictRow {
  std::size_t index = 0;
  std::string timestamp;
  double value = 0.0;
  std::optional<double> predicted;
  std::optional<double> aare;
  std::optional<double> threshold;
  std::string phase;
  bool is_anomaly = false;
  bool retrained = false;
  double elapsed_seconds = 0.0;
};

VerdictRow to_row(const PointVerdict& verdict);
// Score columns come from the detection phase; elapsed covers both phases.
VerdictRow to_row(const SaladVerdict& verdict);

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& doc);

struct ReportDocument {
  MetricsReport metrics;
  nlohmann::json config;  // echo of the resolved run configuration
  nlohmann::json extra = nlohmann::json::object();  // algorithm-specific figures

  nlohmann::json to_json() const;
  static ReportDocument from_json(const nlohmann::json& doc);
};

std::string render_report(const ReportDocument& report);
ReportDocument load_report(const std::filesystem::path& path);

std::string render_verdicts_csv(std::span<const VerdictRow> rows);
std::string render_plot_csv(std::span<const VerdictRow> rows);

// Writes verdicts.csv, report.json and plot.csv under out_dir (created if
// missing). Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> write_outputs(std::span<const VerdictRow> rows, const ReportDocument& report,
                                                 const std::filesystem::path& out_dir);

// Whole-file helpers with IoError on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace streamad

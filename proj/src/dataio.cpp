#include "streamad/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<int> parse_fixed_int(std::string_view s, std::size_t pos, std::size_t width) {
  if (pos + width > s.size()) return std::nullopt;
  int v = 0;
  const char* first = s.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + width, v);
  if (ec != std::errc() || ptr != first + width) return std::nullopt;
  return v;
}

std::optional<double> parse_iso(std::string_view s) {
  // YYYY-MM-DD[ T]HH:MM[:SS[.frac]][Z]
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') || s[13] != ':') {
    return std::nullopt;
  }
  const auto y = parse_fixed_int(s, 0, 4), mo = parse_fixed_int(s, 5, 2), d = parse_fixed_int(s, 8, 2);
  const auto hh = parse_fixed_int(s, 11, 2), mm = parse_fixed_int(s, 14, 2);
  if (!y || !mo || !d || !hh || !mm) return std::nullopt;
  std::string_view rest = s.substr(16);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  double seconds = 0.0;
  if (!rest.empty()) {
    if (rest.front() != ':') return std::nullopt;
    const auto sec = parse_number(rest.substr(1));
    if (!sec || *sec < 0.0 || *sec >= 61.0) return std::nullopt;
    seconds = *sec;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *hh > 23 || *mm > 59) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + *hh * 3600.0 + *mm * 60.0 + seconds;
}

bool is_numeric_timestamp(const Timestamp& ts) { return parse_number(ts.text).has_value(); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

Timestamp parse_timestamp(const std::string& text) {
  const std::string_view t = trim(text);
  if (const auto epoch = parse_number(t)) {
    if (!std::isfinite(*epoch)) throw ParseError("timestamp '" + text + "' is not finite");
    return {std::string(t), *epoch};
  }
  if (const auto iso = parse_iso(t)) return {std::string(t), *iso};
  throw ParseError("unrecognized timestamp '" + text + "'");
}

std::string format_iso_timestamp(double epoch_seconds) {
  using namespace std::chrono;
  const double whole = std::floor(epoch_seconds);
  const double frac = epoch_seconds - whole;
  const auto secs = static_cast<std::int64_t>(whole);
  const sys_days day_point{days{static_cast<int>(secs >= 0 ? secs / 86400 : (secs - 86399) / 86400)}};
  const std::int64_t in_day = secs - static_cast<std::int64_t>(day_point.time_since_epoch().count()) * 86400;
  const year_month_day ymd{day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(in_day / 3600), static_cast<int>(in_day % 3600 / 60),
                static_cast<int>(in_day % 60));
  std::string out(buf);
  if (frac > 0.0) {
    std::snprintf(buf, sizeof buf, "%.6f", frac);
    out += std::string(buf).substr(1);
  }
  return out;
}

Timestamp index_timestamp(std::size_t index) {
  return {std::to_string(index), static_cast<double>(index)};
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const DataPoint& p : points) out.push_back(p.value);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

TimeSeries parse_csv(const std::string& text, const std::string& name) {
  TimeSeries series;
  series.name = name;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (line_no == 1 && row.starts_with("\xEF\xBB\xBF")) row.remove_prefix(3);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "timestamp,value") {
        throw ParseError("line " + std::to_string(line_no) + ": expected header 'timestamp,value'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two comma-separated fields");
    }
    Timestamp ts;
    try {
      ts = parse_timestamp(std::string(row.substr(0, comma)));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto value = parse_number(row.substr(comma + 1));
    if (!value || !std::isfinite(*value)) {
      throw ParseError("line " + std::to_string(line_no) + ": value '" + std::string(trim(row.substr(comma + 1))) +
                       "' is not a finite number");
    }
    if (!series.points.empty() && !(ts.epoch_seconds > series.points.back().timestamp.epoch_seconds)) {
      throw ContractError("line " + std::to_string(line_no) + ": timestamp '" + ts.text +
                          "' is not after the previous row");
    }
    series.points.push_back({std::move(ts), *value});
  }
  if (!header_seen) throw ParseError("line 1: missing header 'timestamp,value'");

  if (series.points.size() >= 2) {
    std::vector<double> gaps;
    gaps.reserve(series.points.size() - 1);
    for (std::size_t i = 1; i < series.points.size(); ++i) {
      gaps.push_back(series.points[i].timestamp.epoch_seconds - series.points[i - 1].timestamp.epoch_seconds);
    }
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    series.interval_seconds = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    series.irregular_interval = std::any_of(gaps.begin(), gaps.end(), [&](double g) {
      return std::abs(g - series.interval_seconds) > 0.01 * series.interval_seconds;
    });
  }
  return series;
}

TimeSeries load_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.stem().string());
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::string out = "timestamp,value\n";
  for (const DataPoint& p : series.points) {
    out += p.timestamp.text;
    out += ',';
    out += format_double(p.value);
    out += '\n';
  }
  write_text_file(path, out);
}

TimeSeries duplicate(const TimeSeries& series, std::size_t n) {
  if (n == 0) throw ContractError("duplicate: n must be >= 1");
  if (n == 1 || series.points.empty()) return series;

  TimeSeries out;
  out.name = series.name + "-" + std::to_string(n);
  out.interval_seconds = series.interval_seconds;
  out.irregular_interval = series.irregular_interval;
  out.points.reserve(series.size() * n);

  const double first = series.points.front().timestamp.epoch_seconds;
  const double last = series.points.back().timestamp.epoch_seconds;
  const double period = last - first + series.interval_seconds;
  const bool numeric = is_numeric_timestamp(series.points.front().timestamp);

  for (std::size_t k = 0; k < n; ++k) {
    for (const DataPoint& p : series.points) {
      if (k == 0) {
        out.points.push_back(p);
        continue;
      }
      const double t = p.timestamp.epoch_seconds + static_cast<double>(k) * period;
      out.points.push_back({{numeric ? format_double(t) : format_iso_timestamp(t), t}, p.value});
    }
  }
  return out;
}

LabelSet label_tile(const LabelSet& labels, std::size_t series_len, std::size_t n) {
  if (n == 0) throw ContractError("label_tile: n must be >= 1");
  check_labels_in_range(labels, series_len);
  LabelSet out;
  const auto len = static_cast<std::int64_t>(series_len);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t offset = static_cast<std::int64_t>(k) * len;
    for (std::int64_t z : labels.point_anomalies) out.point_anomalies.push_back(z + offset);
    for (const IndexRange& r : labels.collective_anomalies) {
      out.collective_anomalies.push_back({r.start + offset, r.end + offset});
    }
  }
  return out;
}

void check_labels_in_range(const LabelSet& labels, std::size_t series_len) {
  const auto len = static_cast<std::int64_t>(series_len);
  for (std::int64_t z : labels.point_anomalies) {
    if (z < 0 || z >= len) {
      throw ContractError("point label " + std::to_string(z) + " outside series of length " + std::to_string(len));
    }
  }
  for (const IndexRange& r : labels.collective_anomalies) {
    if (r.start < 0 || r.end >= len || r.start > r.end) {
      throw ContractError("collective label [" + std::to_string(r.start) + ", " + std::to_string(r.end) +
                          "] outside series of length " + std::to_string(len));
    }
  }
}

LabelSet parse_labels(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("labels: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("labels: top level must be an object");

  LabelSet labels;
  if (!doc.contains("points") || !doc["points"].is_array()) {
    throw ParseError("labels: key 'points' must be an array of integers");
  }
  for (const json& z : doc["points"]) {
    if (!z.is_number_integer()) throw ParseError("labels: key 'points' must contain only integers");
    labels.point_anomalies.push_back(z.get<std::int64_t>());
  }
  if (!doc.contains("collectives") || !doc["collectives"].is_array()) {
    throw ParseError("labels: key 'collectives' must be an array of [start, end] pairs");
  }
  for (const json& pair : doc["collectives"]) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw ParseError("labels: key 'collectives' must contain [start, end] integer pairs");
    }
    const IndexRange r{pair[0].get<std::int64_t>(), pair[1].get<std::int64_t>()};
    if (r.start > r.end) {
      throw ParseError("labels: key 'collectives' has start " + std::to_string(r.start) + " after end " +
                       std::to_string(r.end));
    }
    labels.collective_anomalies.push_back(r);
  }
  labels.normalize();
  return labels;
}

LabelSet load_labels(const std::filesystem::path& path) { return parse_labels(read_text_file(path)); }

// --- outputs ----------------------------------------------------------------

VerdictRow to_row(const PointVerdict& v) {
  return {v.index,  v.timestamp.text,          v.value,        v.predicted,    v.aare, v.threshold,
          std::string(to_string(v.phase)), v.is_anomaly, v.retrained, v.elapsed_seconds};
}

VerdictRow to_row(const SaladVerdict& v) {
  VerdictRow row;
  row.index = v.index;
  row.timestamp = v.timestamp.text;
  row.value = v.raw_value;
  row.predicted = v.predicted_raw;
  row.elapsed_seconds = v.elapsed_conversion_seconds + v.elapsed_detection_seconds;
  if (v.inner_verdict) {
    row.aare = v.inner_verdict->aare;
    row.threshold = v.inner_verdict->threshold;
    row.phase = std::string(to_string(v.inner_verdict->phase));
    row.is_anomaly = v.inner_verdict->is_anomaly;
    row.retrained = v.inner_verdict->retrained;
  } else {
    row.phase = std::string(to_string(v.phase));
  }
  return row;
}

std::string render_verdicts_csv(std::span<const VerdictRow> rows) {
  std::string out = "index,timestamp,value,predicted,aare,threshold,phase,is_anomaly,retrained,elapsed_seconds\n";
  for (const VerdictRow& r : rows) {
    out += std::to_string(r.index) + ',' + r.timestamp + ',' + format_double(r.value) + ',' +
           optional_cell(r.predicted) + ',' + optional_cell(r.aare) + ',' + optional_cell(r.threshold) + ',' +
           r.phase + ',' + (r.is_anomaly ? "1" : "0") + ',' + (r.retrained ? "1" : "0") + ',' +
           format_double(r.elapsed_seconds) + '\n';
  }
  return out;
}

std::string render_plot_csv(std::span<const VerdictRow> rows) {
  std::string out = "index,value,predicted,aare,threshold\n";
  for (const VerdictRow& r : rows) {
    out += std::to_string(r.index) + ',' + format_double(r.value) + ',' + optional_cell(r.predicted) + ',' +
           optional_cell(r.aare) + ',' + optional_cell(r.threshold) + '\n';
  }
  return out;
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  return {
      {"tp", r.tp},
      {"fp", r.fp},
      {"fn", r.fn},
      {"precision", r.precision},
      {"recall", r.recall},
      {"fscore", r.fscore},
      {"retrain_count", r.retrain_count},
      {"total_points", r.total_points},
      {"training_ratio", r.training_ratio},
      {"adt_nt_mean", r.timing.adt_nt_mean},
      {"adt_nt_std", r.timing.adt_nt_std},
      {"adt_nt_count", r.timing.adt_nt_count},
      {"adt_t_mean", r.timing.adt_t_mean},
      {"adt_t_std", r.timing.adt_t_std},
      {"adt_t_count", r.timing.adt_t_count},
      {"labeled_points", r.labeled_points},
      {"labeled_collectives", r.labeled_collectives},
      {"detection_events", r.detection_events},
      {"flagged_points", r.flagged_points},
      {"k", r.k},
  };
}

MetricsReport metrics_from_json(const nlohmann::json& doc) {
  MetricsReport r;
  try {
    doc.at("tp").get_to(r.tp);
    doc.at("fp").get_to(r.fp);
    doc.at("fn").get_to(r.fn);
    doc.at("precision").get_to(r.precision);
    doc.at("recall").get_to(r.recall);
    doc.at("fscore").get_to(r.fscore);
    doc.at("retrain_count").get_to(r.retrain_count);
    doc.at("total_points").get_to(r.total_points);
    doc.at("training_ratio").get_to(r.training_ratio);
    doc.at("adt_nt_mean").get_to(r.timing.adt_nt_mean);
    doc.at("adt_nt_std").get_to(r.timing.adt_nt_std);
    doc.at("adt_nt_count").get_to(r.timing.adt_nt_count);
    doc.at("adt_t_mean").get_to(r.timing.adt_t_mean);
    doc.at("adt_t_std").get_to(r.timing.adt_t_std);
    doc.at("adt_t_count").get_to(r.timing.adt_t_count);
    doc.at("labeled_points").get_to(r.labeled_points);
    doc.at("labeled_collectives").get_to(r.labeled_collectives);
    doc.at("detection_events").get_to(r.detection_events);
    doc.at("flagged_points").get_to(r.flagged_points);
    doc.at("k").get_to(r.k);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report metrics: ") + e.what());
  }
  return r;
}

nlohmann::json ReportDocument::to_json() const {
  return {{"schema_version", kReportSchemaVersion}, {"metrics", metrics_to_json(metrics)}, {"config", config},
          {"extra", extra}};
}

ReportDocument ReportDocument::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version") || doc["schema_version"] != kReportSchemaVersion) {
    throw ParseError("report: missing or unsupported schema_version");
  }
  if (!doc.contains("metrics")) throw ParseError("report: missing key 'metrics'");
  ReportDocument r;
  r.metrics = metrics_from_json(doc["metrics"]);
  r.config = doc.value("config", nlohmann::json::object());
  r.extra = doc.value("extra", nlohmann::json::object());
  return r;
}

std::string render_report(const ReportDocument& report) { return report.to_json().dump(2) + "\n"; }

ReportDocument load_report(const std::filesystem::path& path) {
  try {
    return ReportDocument::from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("report '" + path.string() + "': " + e.what());
  }
}

std::vector<std::filesystem::path> write_outputs(std::span<const VerdictRow> rows, const ReportDocument& report,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const std::vector<std::filesystem::path> paths = {out_dir / "verdicts.csv", out_dir / "report.json",
                                                    out_dir / "plot.csv"};
  write_text_file(paths[0], render_verdicts_csv(rows));
  write_text_file(paths[1], render_report(report));
  write_text_file(paths[2], render_plot_csv(rows));
  return paths;
}

}  // namespace streamad

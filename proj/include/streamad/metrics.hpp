#pragma once

// Evaluation: K-window relaxed matching of detection events against labeled
// point and collective anomalies, precision/recall/F-score, LSTM training
// ratio, and per-point detection-time summaries.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "streamad/repad.hpp"

namespace streamad {

// Closed index range [start, end].
struct IndexRange {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool operator==(const IndexRange&) const = default;
  auto operator<=>(const IndexRange&) const = default;
};

struct LabelSet {
  std::vector<std::int64_t> point_anomalies;
  std::vector<IndexRange> collective_anomalies;

  std::size_t size() const noexcept { return point_anomalies.size() + collective_anomalies.size(); }

  // Sorts, removes duplicate points, and merges overlapping collectives.
  void normalize();

  bool operator==(const LabelSet&) const = default;
};

struct MatchPolicy {
  std::int64_t k = 7;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const MatchResult&) const = default;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

struct TimingSummary {
  double adt_nt_mean = 0.0;
  double adt_nt_std = 0.0;
  std::size_t adt_nt_count = 0;
  double adt_t_mean = 0.0;
  double adt_t_std = 0.0;
  std::size_t adt_t_count = 0;

  bool operator==(const TimingSummary&) const = default;
};

struct MetricsReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, fscore = 0.0;
  std::size_t retrain_count = 0;
  std::size_t total_points = 0;
  double training_ratio = 0.0;
  TimingSummary timing;
  std::size_t labeled_points = 0;
  std::size_t labeled_collectives = 0;
  std::size_t detection_events = 0;
  std::size_t flagged_points = 0;
  std::int64_t k = 7;

  bool operator==(const MetricsReport&) const = default;
};

// 7 for intervals up to half an hour, 3 beyond (hourly and coarser).
std::int64_t choose_k(double interval_seconds);

// Collapses sorted unique indices into maximal runs.
std::vector<IndexRange> merge_events(std::span<const std::int64_t> flagged);

// A labeled anomaly is detected when any event intersects its acceptance
// window: [Z-K, Z+K] for a point, [A-K, B] for a collective. An event that
// intersects no window is one false positive.
MatchResult match(const LabelSet& labels, std::span<const IndexRange> events, MatchPolicy policy);

// Harmonic mean; 0 when both inputs are 0.
double f_score(double precision, double recall);

// 0/0 is reported as 0.
Scores scores(std::size_t tp, std::size_t fp, std::size_t fn);

double training_ratio(std::size_t retrain_count, std::size_t total_points);

// Normal-phase verdicts only, split by the retrained flag. Population std.
TimingSummary timing_summary(std::span<const PointVerdict> verdicts);

// Full report for one run. `flagged` are the anomalous indices.
MetricsReport evaluate(const LabelSet& labels, std::span<const std::int64_t> flagged, MatchPolicy policy,
                       std::size_t retrain_count, std::size_t total_points,
                       std::span<const PointVerdict> verdicts);

}  // namespace streamad

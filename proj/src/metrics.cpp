#include "streamad/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

void LabelSet::normalize() {
  std::sort(point_anomalies.begin(), point_anomalies.end());
  point_anomalies.erase(std::unique(point_anomalies.begin(), point_anomalies.end()), point_anomalies.end());

  std::sort(collective_anomalies.begin(), collective_anomalies.end());
  std::vector<IndexRange> merged;
  for (const IndexRange& r : collective_anomalies) {
    if (!merged.empty() && r.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, r.end);
    } else {
      merged.push_back(r);
    }
  }
  collective_anomalies = std::move(merged);
}

std::int64_t choose_k(double interval_seconds) {
  if (!(interval_seconds > 0.0)) throw ContractError("choose_k: interval must be positive");
  return interval_seconds <= 1800.0 ? 7 : 3;
}

std::vector<IndexRange> merge_events(std::span<const std::int64_t> flagged) {
  std::vector<IndexRange> events;
  for (std::int64_t idx : flagged) {
    if (!events.empty() && idx <= events.back().end) {
      throw ContractError("merge_events: indices must be sorted and unique");
    }
    if (!events.empty() && idx == events.back().end + 1) {
      events.back().end = idx;
    } else {
      events.push_back({idx, idx});
    }
  }
  return events;
}

namespace {

bool intersects(const IndexRange& a, const IndexRange& b) { return a.start <= b.end && b.start <= a.end; }

}  // namespace

MatchResult match(const LabelSet& labels, std::span<const IndexRange> events, MatchPolicy policy) {
  std::vector<IndexRange> windows;
  windows.reserve(labels.size());
  for (std::int64_t z : labels.point_anomalies) windows.push_back({z - policy.k, z + policy.k});
  for (const IndexRange& c : labels.collective_anomalies) windows.push_back({c.start - policy.k, c.end});

  MatchResult r;
  for (const IndexRange& w : windows) {
    const bool hit = std::any_of(events.begin(), events.end(), [&](const IndexRange& e) { return intersects(e, w); });
    if (hit) {
      ++r.tp;
    } else {
      ++r.fn;
    }
  }
  for (const IndexRange& e : events) {
    if (std::none_of(windows.begin(), windows.end(), [&](const IndexRange& w) { return intersects(e, w); })) ++r.fp;
  }
  return r;
}

double f_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

Scores scores(std::size_t tp, std::size_t fp, std::size_t fn) {
  Scores s;
  const auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  s.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  s.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  s.fscore = f_score(s.precision, s.recall);
  return s;
}

double training_ratio(std::size_t retrain_count, std::size_t total_points) {
  if (total_points == 0) throw ContractError("training_ratio: total_points must be positive");
  if (retrain_count > total_points) throw ContractError("training_ratio: retrain_count exceeds total_points");
  return static_cast<double>(retrain_count) / static_cast<double>(total_points);
}

TimingSummary timing_summary(std::span<const PointVerdict> verdicts) {
  StreamingStats without_training, with_training;
  for (const PointVerdict& v : verdicts) {
    if (v.phase != Phase::normal) continue;
    (v.retrained ? with_training : without_training).add(v.elapsed_seconds);
  }
  TimingSummary t;
  t.adt_nt_mean = without_training.mean();
  t.adt_nt_std = without_training.stddev();
  t.adt_nt_count = without_training.count();
  t.adt_t_mean = with_training.mean();
  t.adt_t_std = with_training.stddev();
  t.adt_t_count = with_training.count();
  return t;
}

MetricsReport evaluate(const LabelSet& labels, std::span<const std::int64_t> flagged, MatchPolicy policy,
                       std::size_t retrain_count, std::size_t total_points,
                       std::span<const PointVerdict> verdicts) {
  MetricsReport r;
  const std::vector<IndexRange> events = merge_events(flagged);
  const MatchResult m = match(labels, events, policy);
  const Scores s = scores(m.tp, m.fp, m.fn);
  r.tp = m.tp;
  r.fp = m.fp;
  r.fn = m.fn;
  r.precision = s.precision;
  r.recall = s.recall;
  r.fscore = s.fscore;
  r.retrain_count = retrain_count;
  r.total_points = total_points;
  r.training_ratio = training_ratio(retrain_count, total_points);
  r.timing = timing_summary(verdicts);
  r.labeled_points = labels.point_anomalies.size();
  r.labeled_collectives = labels.collective_anomalies.size();
  r.detection_events = events.size();
  r.flagged_points = flagged.size();
  r.k = policy.k;
  return r;
}

}  // namespace streamad

#include "streamad/repad.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "streamad/errors.hpp"

namespace streamad {

void DetectorConfig::validate() const {
  if (predict_forward != 1) {
    throw ConfigError("unsupported predict_forward " + std::to_string(predict_forward) + " (only 1 is supported)");
  }
  if (look_back < 2) throw ConfigError("look_back must be >= 2, got " + std::to_string(look_back));
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (!(epsilon_denominator > 0.0) || !std::isfinite(epsilon_denominator)) {
    throw ConfigError("epsilon_denominator must be a positive finite number");
  }
  backend.validate();
}

std::string_view to_string(Phase phase) { return phase == Phase::bootstrap ? "bootstrap" : "normal"; }

bool PointVerdict::same_decision(const PointVerdict& o) const {
  return index == o.index && timestamp == o.timestamp && value == o.value && predicted == o.predicted &&
         aare == o.aare && threshold == o.threshold && phase == o.phase && is_anomaly == o.is_anomaly &&
         retrained == o.retrained;
}

double abs_rel_error(double actual, double predicted, double eps) {
  return std::abs(actual - predicted) / std::max(std::abs(actual), eps);
}

double aare(std::span<const double> recent_errors) {
  if (recent_errors.empty()) return 0.0;
  return std::accumulate(recent_errors.begin(), recent_errors.end(), 0.0) /
         static_cast<double>(recent_errors.size());
}

std::optional<double> threshold(const StreamingStats& stats) {
  if (stats.count() < 2) return std::nullopt;
  return stats.mean() + 3.0 * stats.stddev();
}

bool breaches_threshold(double score, double limit, const StreamingStats& stats) {
  if (score > limit) return true;
  return score == limit && stats.m2() > 0.0;
}

RepadDetector::RepadDetector(const DetectorConfig& config) {
  config.validate();
  state_.config = config;
  state_.recent_values = SlidingWindow<double>(config.look_back);
  state_.recent_abs_rel_errors = SlidingWindow<double>(config.look_back);
}

RepadDetector new_detector(const DetectorConfig& config) { return RepadDetector(config); }

LstmModel RepadDetector::train_fresh(std::span<const double> window) const {
  const auto& cfg = state_.config;
  return train(init_model(cfg.backend, cfg.hidden_size), window, cfg.backend);
}

PointVerdict RepadDetector::step(const Timestamp& timestamp, double value) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();

  if (state_.last_epoch_seconds && !(timestamp.epoch_seconds > *state_.last_epoch_seconds)) {
    throw ContractError("timestamp '" + timestamp.text + "' does not advance the stream");
  }
  if (!std::isfinite(value)) {
    throw ContractError("non-finite value at index " + std::to_string(state_.points_seen));
  }

  DetectorState& s = state_;
  const std::size_t b = s.config.look_back;
  const double eps = s.config.epsilon_denominator;

  PointVerdict v;
  v.index = s.points_seen;
  v.timestamp = timestamp;
  v.value = value;

  if (v.index >= b) {
    const std::vector<double> window = s.recent_values.values();
    if (!s.model) {
      s.model = train_fresh(window);
      ++s.retrain_count;
      v.retrained = true;
    }
    double predicted = predict_next(*s.model, window);
    s.recent_abs_rel_errors.push(abs_rel_error(value, predicted, eps));

    if (v.index >= 2 * b - 1) {
      v.phase = Phase::normal;
      double score = aare(s.recent_abs_rel_errors.values());
      const std::optional<double> limit = threshold(s.aare_stats);
      v.threshold = limit;

      if (limit && breaches_threshold(score, *limit, s.aare_stats)) {
        LstmModel fresh = train_fresh(window);
        ++s.retrain_count;
        v.retrained = true;
        predicted = predict_next(fresh, window);
        s.recent_abs_rel_errors.replace_last(abs_rel_error(value, predicted, eps));
        score = aare(s.recent_abs_rel_errors.values());
        v.is_anomaly = breaches_threshold(score, *limit, s.aare_stats);
        s.model = std::move(fresh);
      }
      s.aare_stats.add(score);
      v.aare = score;
    }
    v.predicted = predicted;
  }

  s.recent_values.push(value);
  ++s.points_seen;
  s.last_epoch_seconds = timestamp.epoch_seconds;
  v.elapsed_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return v;
}

}  // namespace streamad

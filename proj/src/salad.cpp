#include "streamad/salad.hpp"

#include <chrono>
#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

void SaladConfig::validate() const {
  if (conversion_look_back < 2) {
    throw ConfigError("conversion_look_back must be >= 2, got " + std::to_string(conversion_look_back));
  }
  if (conversion_hidden_size < 1) throw ConfigError("conversion_hidden_size must be >= 1");
  conversion_backend.validate();
  detection.validate();
}

std::string_view to_string(SaladPhase phase) {
  return phase == SaladPhase::conversion_bootstrap ? "conversion_bootstrap" : "active";
}

namespace {

const SaladConfig& validated(const SaladConfig& config) {
  config.validate();
  return config;
}

}  // namespace

SaladDetector::SaladDetector(const SaladConfig& config) : inner_(validated(config).detection) {
  state_.config = config;
  state_.conversion_ring = SlidingWindow<double>(config.conversion_look_back);
  state_.conversion_errors = SlidingWindow<double>(config.conversion_look_back);
}

SaladDetector new_salad(const SaladConfig& config) { return SaladDetector(config); }

LstmModel SaladDetector::train_fresh(std::span<const double> window) const {
  const auto& cfg = state_.config;
  return train(init_model(cfg.conversion_backend, cfg.conversion_hidden_size), window, cfg.conversion_backend);
}

double SaladDetector::forecast(std::size_t index, std::span<const double> window) {
  if (override_) return override_(index, window);
  return predict_next(*state_.conversion_model, window);
}

ConversionOutput SaladDetector::convert_step(const Timestamp& timestamp, double value) {
  SaladState& s = state_;
  if (s.last_epoch_seconds && !(timestamp.epoch_seconds > *s.last_epoch_seconds)) {
    throw ContractError("timestamp '" + timestamp.text + "' does not advance the stream");
  }
  if (!std::isfinite(value)) {
    throw ContractError("non-finite value at index " + std::to_string(s.points_seen));
  }

  const std::size_t index = s.points_seen;
  const std::size_t big_b = s.config.conversion_look_back;
  const double eps = s.config.detection.epsilon_denominator;
  ConversionOutput out;

  if (index >= big_b) {
    const std::vector<double> window = s.conversion_ring.values();
    if (!override_ && !s.conversion_model) {
      s.conversion_model = train_fresh(window);
      ++s.conversion_retrain_count;
      out.retrained = true;
    }
    double predicted = forecast(index, window);
    s.conversion_errors.push(abs_rel_error(value, predicted, eps));

    if (s.conversion_errors.full()) {
      double score = aare(s.conversion_errors.values());
      const std::optional<double> limit = threshold(s.conversion_stats);
      if (!override_ && limit && breaches_threshold(score, *limit, s.conversion_stats)) {
        s.conversion_model = train_fresh(window);
        ++s.conversion_retrain_count;
        out.retrained = true;
        predicted = forecast(index, window);
        s.conversion_errors.replace_last(abs_rel_error(value, predicted, eps));
        score = aare(s.conversion_errors.values());
      }
      s.conversion_stats.add(score);
      out.aare = score;
    }
    out.predicted = predicted;
  }

  s.conversion_ring.push(value);
  ++s.points_seen;
  s.last_epoch_seconds = timestamp.epoch_seconds;
  return out;
}

SaladVerdict SaladDetector::step(const Timestamp& timestamp, double value) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();

  SaladVerdict v;
  v.index = state_.points_seen;
  v.timestamp = timestamp;
  v.raw_value = value;

  const ConversionOutput conv = convert_step(timestamp, value);
  const auto converted = Clock::now();
  v.predicted_raw = conv.predicted;
  v.conversion_aare = conv.aare;
  v.conversion_retrained = conv.retrained;
  v.elapsed_conversion_seconds = std::chrono::duration<double>(converted - started).count();

  if (conv.aare) {
    v.phase = SaladPhase::active;
    PointVerdict inner = inner_.step(timestamp, *conv.aare);
    inner.index = v.index;
    v.elapsed_detection_seconds = inner.elapsed_seconds;
    v.inner_verdict = std::move(inner);
  }
  return v;
}

}  // namespace streamad

#pragma once

// Online detector: forecast each point from the last b values, score the
// forecast with the AARE over the last b relative errors, and compare it with
// a threshold that adapts to every AARE seen so far. A threshold breach
// triggers a retrain; the point is anomalous only if the retrained model
// still breaches.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "streamad/lstm.hpp"
#include "streamad/stats.hpp"
#include "streamad/timestamp.hpp"

namespace streamad {

struct DetectorConfig {
  std::size_t look_back = 3;
  std::size_t predict_forward = 1;
  BackendConfig backend{};
  std::size_t hidden_size = 10;
  double epsilon_denominator = 1e-4;

  // Throws ConfigError.
  void validate() const;

  bool operator==(const DetectorConfig&) const = default;
};

enum class Phase { bootstrap, normal };
std::string_view to_string(Phase phase);

struct PointVerdict {
  std::size_t index = 0;
  Timestamp timestamp;
  double value = 0.0;
  std::optional<double> predicted;
  std::optional<double> aare;
  std::optional<double> threshold;
  Phase phase = Phase::bootstrap;
  bool is_anomaly = false;
  bool retrained = false;
  double elapsed_seconds = 0.0;

  // Field-wise equality that ignores elapsed_seconds.
  bool same_decision(const PointVerdict& other) const;
};

// |actual - predicted| / max(|actual|, eps)
double abs_rel_error(double actual, double predicted, double eps);

// Arithmetic mean of the recent per-point errors.
double aare(std::span<const double> recent_errors);

// mu + 3 sigma over the AARE history; absent until two values exist.
std::optional<double> threshold(const StreamingStats& stats);

// AARE >= threshold, except that a history with zero spread is not breached
// by a value equal to it.
bool breaches_threshold(double score, double limit, const StreamingStats& stats);

struct DetectorState {
  DetectorConfig config;
  std::optional<LstmModel> model;
  SlidingWindow<double> recent_values;
  SlidingWindow<double> recent_abs_rel_errors;
  StreamingStats aare_stats;
  std::size_t retrain_count = 0;
  std::size_t points_seen = 0;
  std::optional<double> last_epoch_seconds;

  bool operator==(const DetectorState&) const = default;
};

class RepadDetector {
 public:
  // Throws ConfigError for an invalid config (predict_forward != 1, look_back < 2, ...).
  explicit RepadDetector(const DetectorConfig& config);

  // Consumes the next point. Throws ContractError when `timestamp` does not
  // advance, NumericOverflowError from the forecaster.
  PointVerdict step(const Timestamp& timestamp, double value);

  const DetectorState& state() const noexcept { return state_; }
  const DetectorConfig& config() const noexcept { return state_.config; }

 private:
  LstmModel train_fresh(std::span<const double> window) const;

  DetectorState state_;
};

RepadDetector new_detector(const DetectorConfig& config);

}  // namespace streamad

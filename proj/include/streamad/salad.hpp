#pragma once

// Two-phase detector for series with a recurrent pattern. The conversion
// phase forecasts raw values with a long look-back and turns the forecast
// errors into an AARE series; the detection phase is a RePAD detector fed
// with that AARE series.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "streamad/lstm.hpp"
#include "streamad/repad.hpp"
#include "streamad/stats.hpp"
#include "streamad/timestamp.hpp"

namespace streamad {

struct SaladConfig {
  std::size_t conversion_look_back = 63;
  BackendConfig conversion_backend{InitScheme::uniform_scaled, Optimizer::sgd, 0.001, 100, 140, 1e-8,
                                   Scaling::window_minmax};
  std::size_t conversion_hidden_size = 10;
  DetectorConfig detection{3, 1, BackendConfig{InitScheme::uniform_scaled, Optimizer::sgd, 0.001, 50, 140, 1e-8,
                                               Scaling::window_minmax},
                           10, 1e-4};

  // Throws ConfigError.
  void validate() const;

  bool operator==(const SaladConfig&) const = default;
};

enum class SaladPhase { conversion_bootstrap, active };
std::string_view to_string(SaladPhase phase);

struct SaladVerdict {
  std::size_t index = 0;
  Timestamp timestamp;
  double raw_value = 0.0;
  std::optional<double> predicted_raw;
  std::optional<double> conversion_aare;
  std::optional<PointVerdict> inner_verdict;
  SaladPhase phase = SaladPhase::conversion_bootstrap;
  bool conversion_retrained = false;
  double elapsed_conversion_seconds = 0.0;
  double elapsed_detection_seconds = 0.0;

  bool is_anomaly() const noexcept { return inner_verdict && inner_verdict->is_anomaly; }
};

struct ConversionOutput {
  std::optional<double> predicted;
  std::optional<double> aare;
  bool retrained = false;
};

// Replaces the conversion forecaster: receives the raw index being predicted
// and the last B raw values. Used to plug in reference forecasters in tests.
using ForecastOverride = std::function<double(std::size_t index, std::span<const double> window)>;

struct SaladState {
  SaladConfig config;
  std::optional<LstmModel> conversion_model;
  SlidingWindow<double> conversion_ring;
  SlidingWindow<double> conversion_errors;
  StreamingStats conversion_stats;
  std::size_t conversion_retrain_count = 0;
  std::size_t points_seen = 0;
  std::optional<double> last_epoch_seconds;
};

class SaladDetector {
 public:
  explicit SaladDetector(const SaladConfig& config);

  // Conversion phase only. Throws like RepadDetector::step.
  ConversionOutput convert_step(const Timestamp& timestamp, double value);

  // Conversion followed by detection over the emitted AARE.
  SaladVerdict step(const Timestamp& timestamp, double value);

  void set_forecast_override(ForecastOverride forecaster) { override_ = std::move(forecaster); }

  const SaladState& state() const noexcept { return state_; }
  const RepadDetector& inner() const noexcept { return inner_; }

 private:
  double forecast(std::size_t index, std::span<const double> window);
  LstmModel train_fresh(std::span<const double> window) const;

  SaladState state_;
  RepadDetector inner_;
  ForecastOverride override_;
};

SaladDetector new_salad(const SaladConfig& config);

}  // namespace streamad

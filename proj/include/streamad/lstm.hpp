#pragma once

// Single-hidden-layer LSTM regressor with a scalar input per step and a linear
// head. Everything is 64-bit floating point and deterministic for a given
// BackendConfig.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamad {

enum class InitScheme { uniform_scaled, normal_scaled, zero_bias_uniform };
enum class Optimizer { sgd, adam };
enum class Scaling { none, window_minmax };

std::string_view to_string(InitScheme scheme);
std::string_view to_string(Optimizer optimizer);
std::string_view to_string(Scaling scaling);
std::optional<InitScheme> parse_init_scheme(std::string_view text);
std::optional<Optimizer> parse_optimizer(std::string_view text);
std::optional<Scaling> parse_scaling(std::string_view text);

// The "numeric backend": the knobs that differ between deep-learning
// libraries while the detection algorithm stays the same.
struct BackendConfig {
  InitScheme init_scheme = InitScheme::uniform_scaled;
  Optimizer optimizer = Optimizer::sgd;
  double learning_rate = 0.005;
  std::size_t epochs = 50;
  std::uint64_t seed = 140;
  double adam_epsilon = 1e-8;
  Scaling scaling = Scaling::window_minmax;

  // Throws ConfigError.
  void validate() const;

  bool operator==(const BackendConfig&) const = default;
};

enum class Gate : std::size_t { input = 0, forget = 1, output = 2, candidate = 3 };
inline constexpr std::size_t kGateCount = 4;
inline constexpr std::array<Gate, kGateCount> kGates = {Gate::input, Gate::forget, Gate::output,
                                                        Gate::candidate};
std::string_view to_string(Gate gate);

// All trainable parameters in one flat buffer so optimizers and gradient
// checks can treat them uniformly. Layout, in order:
//   input weights      4 x H      (gate-major)
//   recurrent weights  4 x H x H  (gate-major, row = receiving unit)
//   gate biases        4 x H
//   output weights     H
//   output bias        1
class LstmParams {
 public:
  LstmParams() = default;
  explicit LstmParams(std::size_t hidden_size);

  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> input_weights(Gate gate);
  std::span<const double> input_weights(Gate gate) const;
  std::span<double> recurrent_weights(Gate gate);
  std::span<const double> recurrent_weights(Gate gate) const;
  std::span<double> gate_biases(Gate gate);
  std::span<const double> gate_biases(Gate gate) const;
  std::span<double> output_weights();
  std::span<const double> output_weights() const;
  double& output_bias();
  double output_bias() const;

  // Weight from previous hidden unit `from` into unit `to` of `gate`.
  double& recurrent(Gate gate, std::size_t to, std::size_t from) {
    return recurrent_weights(gate)[to * hidden_ + from];
  }
  double recurrent(Gate gate, std::size_t to, std::size_t from) const {
    return recurrent_weights(gate)[to * hidden_ + from];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  bool operator==(const LstmParams&) const = default;

 private:
  std::size_t input_offset(Gate gate) const noexcept;
  std::size_t recurrent_offset(Gate gate) const noexcept;
  std::size_t bias_offset(Gate gate) const noexcept;
  std::size_t head_offset() const noexcept;

  std::size_t hidden_ = 0;
  std::vector<double> data_;
};

using LstmGradients = LstmParams;

// Affine map between raw values and network space, fitted on a training
// window. A constant window cannot be min-max scaled; it collapses instead:
// inputs are only centred and the inverse map returns the window's value.
struct AffineScaling {
  enum class Kind { identity, minmax, collapsed };

  Kind kind = Kind::identity;
  double center = 0.0;
  double half_range = 1.0;

  static AffineScaling fit(std::span<const double> window, Scaling scaling);

  double forward(double raw) const noexcept;
  double inverse(double network_value) const noexcept;

  bool operator==(const AffineScaling&) const = default;
};

std::string_view to_string(AffineScaling::Kind kind);

struct LstmModel {
  LstmParams params;
  AffineScaling scaling;
  // Window length of the training call that produced this model; 0 when
  // the model was never trained.
  std::size_t look_back = 0;

  std::size_t hidden_size() const noexcept { return params.hidden_size(); }

  bool operator==(const LstmModel&) const = default;
};

// Activations of one time step, kept for backpropagation.
struct StepActivations {
  double input = 0.0;
  std::vector<double> h_prev, c_prev;
  std::vector<double> input_gate, forget_gate, output_gate, candidate;
  std::vector<double> cell, cell_tanh, hidden;
  double output = 0.0;
};

struct ForwardResult {
  double prediction = 0.0;  // head applied to the final hidden state
  std::vector<StepActivations> cache;
};

LstmModel init_model(const BackendConfig& config, std::size_t hidden_size);

// forward() and backprop() work in network space: the scaling map stored on
// the model is NOT applied. train() and predict_next() apply it.
ForwardResult forward(const LstmModel& model, std::span<const double> window);

// Mean squared teacher-forced error: inputs window[0..b-2], targets
// window[1..b-1].
double sequence_loss(const LstmModel& model, std::span<const double> window);

LstmGradients backprop(const LstmModel& model, std::span<const double> window);

struct TrainTrace {
  LstmModel model;
  // losses[k] is the loss before epoch k's update; the final entry is the
  // loss of the returned model. Size epochs + 1.
  std::vector<double> losses;
};

LstmModel train(const LstmModel& model, std::span<const double> window, const BackendConfig& config);
TrainTrace train_traced(const LstmModel& model, std::span<const double> window,
                        const BackendConfig& config);

// One-step-ahead forecast in raw units. Pure.
double predict_next(const LstmModel& model, std::span<const double> window);

// Debug dump: one array per weight matrix (row-major) plus the config.
std::string model_to_json(const LstmModel& model, const BackendConfig& config);

}  // namespace streamad

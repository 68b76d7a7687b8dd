#include "streamad/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "streamad/errors.hpp"
#include "streamad/rng.hpp"

namespace streamad {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t gate_index(Gate gate) { return static_cast<std::size_t>(gate); }

void require_window(std::span<const double> window, std::size_t minimum, const char* op) {
  if (window.size() < minimum) {
    throw ContractError(std::string(op) + ": window needs at least " + std::to_string(minimum) +
                        " values, got " + std::to_string(window.size()));
  }
}

struct BackwardResult {
  LstmGradients grads;
  double loss = 0.0;
};

// Teacher-forced pass: step t consumes window[t] and its head output is
// scored against window[t + 1].
BackwardResult loss_and_gradients(const LstmModel& model, std::span<const double> window) {
  require_window(window, 2, "backprop");
  const std::size_t steps = window.size() - 1;
  const std::size_t h = model.hidden_size();
  const LstmParams& p = model.params;

  ForwardResult fwd = forward(model, window.first(steps));

  BackwardResult out{LstmGradients(h), 0.0};
  LstmGradients& g = out.grads;

  std::vector<double> dy(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double err = fwd.cache[t].output - window[t + 1];
    out.loss += err * err;
    dy[t] = 2.0 * err / static_cast<double>(steps);
  }
  out.loss /= static_cast<double>(steps);
  if (!std::isfinite(out.loss)) {
    throw NumericOverflowError("non-finite training loss", steps - 1);
  }

  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::array<std::vector<double>, kGateCount> dz;
  for (auto& v : dz) v.assign(h, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const StepActivations& a = fwd.cache[t];

    g.output_bias() += dy[t];
    auto dwo = g.output_weights();
    for (std::size_t i = 0; i < h; ++i) dwo[i] += dy[t] * a.hidden[i];

    auto wo = p.output_weights();
    auto& dzi = dz[gate_index(Gate::input)];
    auto& dzf = dz[gate_index(Gate::forget)];
    auto& dzo = dz[gate_index(Gate::output)];
    auto& dzg = dz[gate_index(Gate::candidate)];
    for (std::size_t i = 0; i < h; ++i) {
      const double dh = wo[i] * dy[t] + dh_next[i];
      const double o = a.output_gate[i];
      const double tc = a.cell_tanh[i];
      const double dc = dh * o * (1.0 - tc * tc) + dc_next[i];
      const double ig = a.input_gate[i];
      const double fg = a.forget_gate[i];
      const double cg = a.candidate[i];
      dzo[i] = dh * tc * o * (1.0 - o);
      dzi[i] = dc * cg * ig * (1.0 - ig);
      dzf[i] = dc * a.c_prev[i] * fg * (1.0 - fg);
      dzg[i] = dc * ig * (1.0 - cg * cg);
      dc_next[i] = dc * fg;
    }

    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (Gate gate : kGates) {
      const auto& d = dz[gate_index(gate)];
      auto dwx = g.input_weights(gate);
      auto db = g.gate_biases(gate);
      for (std::size_t i = 0; i < h; ++i) {
        dwx[i] += d[i] * a.input;
        db[i] += d[i];
        for (std::size_t j = 0; j < h; ++j) {
          g.recurrent(gate, i, j) += d[i] * a.h_prev[j];
          dh_next[j] += p.recurrent(gate, i, j) * d[i];
        }
      }
    }
  }

  if (!g.all_finite()) {
    throw NumericOverflowError("non-finite gradient", 0);
  }
  return out;
}

}  // namespace

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::uniform_scaled: return "uniform_scaled";
    case InitScheme::normal_scaled: return "normal_scaled";
    case InitScheme::zero_bias_uniform: return "zero_bias_uniform";
  }
  return "?";
}

std::string_view to_string(Optimizer optimizer) {
  return optimizer == Optimizer::sgd ? "sgd" : "adam";
}

std::string_view to_string(Scaling scaling) {
  return scaling == Scaling::none ? "none" : "window_minmax";
}

std::string_view to_string(Gate gate) {
  switch (gate) {
    case Gate::input: return "input";
    case Gate::forget: return "forget";
    case Gate::output: return "output";
    case Gate::candidate: return "candidate";
  }
  return "?";
}

std::string_view to_string(AffineScaling::Kind kind) {
  switch (kind) {
    case AffineScaling::Kind::identity: return "identity";
    case AffineScaling::Kind::minmax: return "minmax";
    case AffineScaling::Kind::collapsed: return "collapsed";
  }
  return "?";
}

std::optional<InitScheme> parse_init_scheme(std::string_view text) {
  for (auto s : {InitScheme::uniform_scaled, InitScheme::normal_scaled, InitScheme::zero_bias_uniform}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<Optimizer> parse_optimizer(std::string_view text) {
  if (text == "sgd") return Optimizer::sgd;
  if (text == "adam") return Optimizer::adam;
  return std::nullopt;
}

std::optional<Scaling> parse_scaling(std::string_view text) {
  if (text == "none") return Scaling::none;
  if (text == "window_minmax") return Scaling::window_minmax;
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a positive finite number");
  }
  if (!(adam_epsilon > 0.0) || !std::isfinite(adam_epsilon)) {
    throw ConfigError("adam_epsilon must be a positive finite number");
  }
}

// --- LstmParams -------------------------------------------------------------

LstmParams::LstmParams(std::size_t hidden_size)
    : hidden_(hidden_size),
      data_(kGateCount * hidden_size * (hidden_size + 2) + hidden_size + 1, 0.0) {}

std::size_t LstmParams::input_offset(Gate gate) const noexcept { return gate_index(gate) * hidden_; }

std::size_t LstmParams::recurrent_offset(Gate gate) const noexcept {
  return kGateCount * hidden_ + gate_index(gate) * hidden_ * hidden_;
}

std::size_t LstmParams::bias_offset(Gate gate) const noexcept {
  return kGateCount * hidden_ * (hidden_ + 1) + gate_index(gate) * hidden_;
}

std::size_t LstmParams::head_offset() const noexcept { return kGateCount * hidden_ * (hidden_ + 2); }

std::span<double> LstmParams::input_weights(Gate gate) {
  return std::span(data_).subspan(input_offset(gate), hidden_);
}
std::span<const double> LstmParams::input_weights(Gate gate) const {
  return std::span(data_).subspan(input_offset(gate), hidden_);
}
std::span<double> LstmParams::recurrent_weights(Gate gate) {
  return std::span(data_).subspan(recurrent_offset(gate), hidden_ * hidden_);
}
std::span<const double> LstmParams::recurrent_weights(Gate gate) const {
  return std::span(data_).subspan(recurrent_offset(gate), hidden_ * hidden_);
}
std::span<double> LstmParams::gate_biases(Gate gate) {
  return std::span(data_).subspan(bias_offset(gate), hidden_);
}
std::span<const double> LstmParams::gate_biases(Gate gate) const {
  return std::span(data_).subspan(bias_offset(gate), hidden_);
}
std::span<double> LstmParams::output_weights() {
  return std::span(data_).subspan(head_offset(), hidden_);
}
std::span<const double> LstmParams::output_weights() const {
  return std::span(data_).subspan(head_offset(), hidden_);
}
double& LstmParams::output_bias() { return data_.back(); }
double LstmParams::output_bias() const { return data_.back(); }

bool LstmParams::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// --- AffineScaling ----------------------------------------------------------

AffineScaling AffineScaling::fit(std::span<const double> window, Scaling scaling) {
  if (scaling == Scaling::none || window.empty()) return {};
  const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
  const double center = 0.5 * (*lo + *hi);
  const double half = 0.5 * (*hi - *lo);
  if (half > 0.0 && std::isfinite(half)) return {Kind::minmax, center, half};
  return {Kind::collapsed, center, 0.0};
}

double AffineScaling::forward(double raw) const noexcept {
  switch (kind) {
    case Kind::identity: return raw;
    case Kind::minmax: return (raw - center) / half_range;
    case Kind::collapsed: return raw - center;
  }
  return raw;
}

double AffineScaling::inverse(double network_value) const noexcept {
  switch (kind) {
    case Kind::identity: return network_value;
    case Kind::minmax: return center + half_range * network_value;
    case Kind::collapsed: return center;
  }
  return network_value;
}

// --- operations -------------------------------------------------------------

LstmModel init_model(const BackendConfig& config, std::size_t hidden_size) {
  if (hidden_size == 0) throw ConfigError("hidden_size must be >= 1");
  LstmModel model{LstmParams(hidden_size), {}, 0};
  SplitMix64 rng(config.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_size));

  for (double& w : model.params.values()) {
    w = config.init_scheme == InitScheme::normal_scaled ? scale * rng.normal()
                                                        : rng.uniform(-scale, scale);
  }
  if (config.init_scheme == InitScheme::zero_bias_uniform) {
    for (Gate gate : kGates) {
      auto b = model.params.gate_biases(gate);
      std::fill(b.begin(), b.end(), gate == Gate::forget ? 1.0 : 0.0);
    }
    model.params.output_bias() = 0.0;
  }
  return model;
}

ForwardResult forward(const LstmModel& model, std::span<const double> window) {
  require_window(window, 1, "forward");
  const std::size_t h = model.hidden_size();
  const LstmParams& p = model.params;
  if (h == 0 || p.size() != LstmParams(h).size()) {
    throw ContractError("forward: model dimensions are inconsistent");
  }

  ForwardResult out;
  out.cache.reserve(window.size());
  std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);

  for (std::size_t t = 0; t < window.size(); ++t) {
    StepActivations a;
    a.input = window[t];
    a.h_prev = h_prev;
    a.c_prev = c_prev;
    a.input_gate.resize(h);
    a.forget_gate.resize(h);
    a.output_gate.resize(h);
    a.candidate.resize(h);
    a.cell.resize(h);
    a.cell_tanh.resize(h);
    a.hidden.resize(h);

    auto pre = [&](Gate gate, std::size_t i) {
      double z = p.input_weights(gate)[i] * a.input + p.gate_biases(gate)[i];
      const auto row = p.recurrent_weights(gate).subspan(i * h, h);
      for (std::size_t j = 0; j < h; ++j) z += row[j] * h_prev[j];
      return z;
    };

    double y = p.output_bias();
    for (std::size_t i = 0; i < h; ++i) {
      a.input_gate[i] = sigmoid(pre(Gate::input, i));
      a.forget_gate[i] = sigmoid(pre(Gate::forget, i));
      a.output_gate[i] = sigmoid(pre(Gate::output, i));
      a.candidate[i] = std::tanh(pre(Gate::candidate, i));
      a.cell[i] = a.forget_gate[i] * c_prev[i] + a.input_gate[i] * a.candidate[i];
      a.cell_tanh[i] = std::tanh(a.cell[i]);
      a.hidden[i] = a.output_gate[i] * a.cell_tanh[i];
      if (!std::isfinite(a.cell[i]) || !std::isfinite(a.hidden[i])) {
        throw NumericOverflowError("non-finite LSTM activation", t);
      }
      y += p.output_weights()[i] * a.hidden[i];
    }
    if (!std::isfinite(y)) throw NumericOverflowError("non-finite LSTM output", t);
    a.output = y;

    h_prev = a.hidden;
    c_prev = a.cell;
    out.cache.push_back(std::move(a));
  }
  out.prediction = out.cache.back().output;
  return out;
}

double sequence_loss(const LstmModel& model, std::span<const double> window) {
  require_window(window, 2, "sequence_loss");
  const std::size_t steps = window.size() - 1;
  const ForwardResult fwd = forward(model, window.first(steps));
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double err = fwd.cache[t].output - window[t + 1];
    loss += err * err;
  }
  loss /= static_cast<double>(steps);
  if (!std::isfinite(loss)) throw NumericOverflowError("non-finite training loss", steps - 1);
  return loss;
}

LstmGradients backprop(const LstmModel& model, std::span<const double> window) {
  return loss_and_gradients(model, window).grads;
}

namespace {

TrainTrace run_training(const LstmModel& model, std::span<const double> window,
                        const BackendConfig& config, bool record_losses) {
  require_window(window, 2, "train");
  config.validate();
  if (config.epochs == 0) {
    TrainTrace unchanged{model, {}};
    if (record_losses) unchanged.losses.push_back(sequence_loss(model, window));
    return unchanged;
  }

  TrainTrace trace{model, {}};
  LstmModel& m = trace.model;
  m.scaling = AffineScaling::fit(window, config.scaling);
  m.look_back = window.size();

  std::vector<double> scaled(window.size());
  std::transform(window.begin(), window.end(), scaled.begin(),
                 [&](double v) { return m.scaling.forward(v); });

  std::vector<double> first_moment, second_moment;
  if (config.optimizer == Optimizer::adam) {
    first_moment.assign(m.params.size(), 0.0);
    second_moment.assign(m.params.size(), 0.0);
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  double beta1_power = 1.0, beta2_power = 1.0;

  if (record_losses) trace.losses.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    BackwardResult br = loss_and_gradients(m, scaled);
    if (record_losses) trace.losses.push_back(br.loss);

    auto theta = m.params.values();
    auto grad = br.grads.values();
    if (config.optimizer == Optimizer::sgd) {
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= config.learning_rate * grad[k];
    } else {
      beta1_power *= beta1;
      beta2_power *= beta2;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        first_moment[k] = beta1 * first_moment[k] + (1.0 - beta1) * grad[k];
        second_moment[k] = beta2 * second_moment[k] + (1.0 - beta2) * grad[k] * grad[k];
        const double m_hat = first_moment[k] / (1.0 - beta1_power);
        const double v_hat = second_moment[k] / (1.0 - beta2_power);
        theta[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
      }
    }
    if (!m.params.all_finite()) {
      throw NumericOverflowError("non-finite weights after optimizer update", epoch);
    }
  }
  if (record_losses) trace.losses.push_back(sequence_loss(m, scaled));
  return trace;
}

}  // namespace

TrainTrace train_traced(const LstmModel& model, std::span<const double> window,
                        const BackendConfig& config) {
  return run_training(model, window, config, true);
}

LstmModel train(const LstmModel& model, std::span<const double> window, const BackendConfig& config) {
  return std::move(run_training(model, window, config, false).model);
}

double predict_next(const LstmModel& model, std::span<const double> window) {
  if (model.look_back != 0 && window.size() != model.look_back) {
    throw ContractError("predict_next: window length " + std::to_string(window.size()) +
                        " does not match the trained look-back " + std::to_string(model.look_back));
  }
  std::vector<double> scaled(window.size());
  std::transform(window.begin(), window.end(), scaled.begin(),
                 [&](double v) { return model.scaling.forward(v); });
  const double y = model.scaling.inverse(forward(model, scaled).prediction);
  if (!std::isfinite(y)) throw NumericOverflowError("non-finite prediction", window.size() - 1);
  return y;
}

std::string model_to_json(const LstmModel& model, const BackendConfig& config) {
  using nlohmann::json;
  const LstmParams& p = model.params;
  const std::size_t h = model.hidden_size();
  auto as_array = [](std::span<const double> s) { return json(std::vector<double>(s.begin(), s.end())); };

  json doc;
  doc["hidden_size"] = h;
  doc["look_back"] = model.look_back;
  for (Gate gate : kGates) {
    const std::string name(to_string(gate));
    doc["input_weights"][name] = as_array(p.input_weights(gate));
    json rows = json::array();
    for (std::size_t i = 0; i < h; ++i) rows.push_back(as_array(p.recurrent_weights(gate).subspan(i * h, h)));
    doc["recurrent_weights"][name] = rows;
    doc["gate_biases"][name] = as_array(p.gate_biases(gate));
  }
  doc["output_weights"] = as_array(p.output_weights());
  doc["output_bias"] = p.output_bias();
  doc["scaling"] = {{"kind", to_string(model.scaling.kind)},
                    {"center", model.scaling.center},
                    {"half_range", model.scaling.half_range}};
  doc["config"] = {{"init_scheme", to_string(config.init_scheme)},
                   {"optimizer", to_string(config.optimizer)},
                   {"learning_rate", config.learning_rate},
                   {"epochs", config.epochs},
                   {"seed", config.seed},
                   {"adam_epsilon", config.adam_epsilon},
                   {"scaling", to_string(config.scaling)}};
  return doc.dump(2);
}

}  // namespace streamad

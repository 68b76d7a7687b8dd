#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "streamad/dataio.hpp"
#include "streamad/errors.hpp"
#include "streamad/metrics.hpp"
#include "streamad/salad.hpp"

using namespace streamad;

namespace {

SaladConfig small_config(std::size_t big_b) {
  SaladConfig c;
  c.conversion_look_back = big_b;
  c.conversion_backend.epochs = 30;
  return c;
}

}  // namespace

TEST_CASE("new_salad starts empty and is reproducible", "[salad][config]") {
  const SaladDetector a = new_salad(SaladConfig{});
  const SaladDetector b = new_salad(SaladConfig{});
  CHECK(a.state().points_seen == 0);
  CHECK(a.state().conversion_retrain_count == 0);
  CHECK(a.inner().state() == b.inner().state());
  CHECK(a.state().config == b.state().config);
  CHECK(a.state().config.conversion_look_back == 63);
  CHECK(a.state().config.conversion_backend.epochs == 100);

  SaladConfig bad;
  bad.conversion_look_back = 1;
  CHECK_THROWS_AS(SaladDetector(bad), ConfigError);
  bad = SaladConfig{};
  bad.detection.look_back = 1;
  CHECK_THROWS_AS(SaladDetector(bad), ConfigError);
}

TEST_CASE("conversion bootstraps for the first B points", "[salad][convert]") {
  SaladDetector det(small_config(6));
  for (std::size_t i = 0; i < 20; ++i) {
    const ConversionOutput out = det.convert_step(index_timestamp(i), 10.0 + std::sin(0.5 * i));
    INFO("index " << i);
    CHECK(out.predicted.has_value() == (i >= 6));
    CHECK(out.aare.has_value() == (i >= 11));
  }
}

TEST_CASE("constant series converts to near-zero AARE", "[salad][convert]") {
  SaladDetector det(small_config(4));
  for (std::size_t i = 0; i < 30; ++i) {
    const ConversionOutput out = det.convert_step(index_timestamp(i), 5.0);
    if (out.aare) CHECK(*out.aare < 0.01);
  }
  CHECK(det.state().conversion_retrain_count <= 1);
}

TEST_CASE("a perfect forecaster yields exactly zero AARE", "[salad][convert]") {
  std::vector<double> xs;
  for (int i = 0; i < 80; ++i) xs.push_back(3.0 + std::cos(0.2 * i));
  SaladDetector det(small_config(5));
  det.set_forecast_override([&](std::size_t index, std::span<const double> window) {
    REQUIRE(window.size() == 5);
    CHECK(window.back() == xs[index - 1]);
    return xs[index];
  });
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ConversionOutput out = det.convert_step(index_timestamp(i), xs[i]);
    if (out.aare) {
      CHECK(*out.aare == 0.0);
      ++emitted;
    }
  }
  CHECK(emitted == xs.size() - 9);
  CHECK(det.state().conversion_retrain_count == 0);
}

TEST_CASE("inner verdicts equal a standalone detector fed the AARE series", "[salad][property]") {
  const TimeSeries ts = load_csv(STREAMAD_TEST_DATA "/recurrent_flat.csv");
  SaladConfig cfg = small_config(20);
  cfg.detection.backend.epochs = 20;

  SaladDetector salad(cfg);
  SaladDetector twin(cfg);
  RepadDetector standalone(cfg.detection);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto& p = ts.points[i];
    const SaladVerdict v = salad.step(p.timestamp, p.value);
    const SaladVerdict w = twin.step(p.timestamp, p.value);
    INFO("index " << i);
    CHECK(v.index == i);
    CHECK(v.predicted_raw == w.predicted_raw);
    CHECK(v.conversion_aare == w.conversion_aare);
    CHECK(v.is_anomaly() == w.is_anomaly());
    CHECK(v.conversion_aare.has_value() == v.inner_verdict.has_value());
    CHECK((v.phase == SaladPhase::active) == v.inner_verdict.has_value());
    if (v.is_anomaly()) CHECK(v.conversion_aare.has_value());
    if (!v.conversion_aare) continue;
    PointVerdict ref = standalone.step(p.timestamp, *v.conversion_aare);
    REQUIRE(v.inner_verdict->index == i);
    ref.index = i;
    CHECK(v.inner_verdict->same_decision(ref));
    CHECK(v.inner_verdict->value == *v.conversion_aare);
  }
  CHECK(salad.inner().state().retrain_count == standalone.state().retrain_count);
}

TEST_CASE("constant series end to end raises nothing", "[salad][step]") {
  SaladDetector det(small_config(8));
  for (std::size_t i = 0; i < 60; ++i) CHECK_FALSE(det.step(index_timestamp(i), 7.5).is_anomaly());
}

TEST_CASE("flattened period is flagged and clean tail is quiet", "[salad][step]") {
  const TimeSeries ts = load_csv(STREAMAD_TEST_DATA "/recurrent_flat.csv");
  const LabelSet labels = load_labels(STREAMAD_TEST_DATA "/recurrent_flat.labels.json");
  SaladConfig cfg;
  cfg.conversion_look_back = 50;
  SaladDetector det(cfg);
  std::vector<std::int64_t> flagged;
  for (const auto& p : ts.points) {
    const SaladVerdict v = det.step(p.timestamp, p.value);
    if (v.is_anomaly()) flagged.push_back(static_cast<std::int64_t>(v.index));
  }
  const auto events = merge_events(flagged);
  const MatchResult m = match(labels, events, MatchPolicy{7});
  CHECK(m.tp == 1);
  for (const auto& e : events) CHECK(e.end < 750);
}

TEST_CASE("salad rejects out-of-order input", "[salad][step]") {
  SaladDetector det(small_config(4));
  det.step(index_timestamp(3), 1.0);
  CHECK_THROWS_AS(det.step(index_timestamp(2), 1.0), ContractError);
}

#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hpcd/detector.hpp"
#include "hpcd/error.hpp"
#include "hpcd/learners.hpp"
#include "hpcd/replay.hpp"

using namespace hpcd;

namespace {

// Memorizing 1-nn model over one prototype per class so stream contents
// translate directly into per-sample predictions: value 100k predicts
// class k.
TrainedModel prototype_model() {
  Dataset ds;
  ds.feature_names = {"f0"};
  for (int c = 0; c < kNumClasses; ++c) {
    Sample s;
    s.timestamp_ms = c;
    s.pid = 1;
    s.values = {static_cast<std::uint64_t>(100 * c)};
    s.label = class_from_int(c);
    ds.rows.push_back(std::move(s));
  }
  Hyperparams hp;
  hp.knn_k = 1;
  return train(Algorithm::kKnn, ds, hp, 0);
}

Dataset stream_rows(std::int64_t pid, std::int64_t start_ts,
                    const std::vector<std::uint64_t>& values) {
  Dataset ds;
  ds.feature_names = {"f0"};
  for (std::size_t i = 0; i < values.size(); ++i) {
    Sample s;
    s.timestamp_ms = start_ts + static_cast<std::int64_t>(i);
    s.pid = pid;
    s.values = {values[i]};
    ds.rows.push_back(std::move(s));
  }
  return ds;
}

class BrokenStream : public SampleStream {
 public:
  BrokenStream(std::int64_t pid, std::size_t good_samples)
      : pid_(pid), remaining_(good_samples) {}

  std::optional<Sample> next() override {
    if (remaining_ == 0)
      throw Error(ErrorCode::IoError, "counter file went away");
    --remaining_;
    Sample s;
    s.timestamp_ms = ts_++;
    s.pid = pid_;
    s.values = {0};
    return s;
  }

  const std::vector<std::string>& feature_names() const override {
    return names_;
  }

 private:
  std::vector<std::string> names_ = {"f0"};
  std::int64_t pid_;
  std::int64_t ts_ = 0;
  std::size_t remaining_;
};

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("config validation") {
  DetectorConfig ok;
  CHECK_NOTHROW(validate(ok));
  ok.alert_threshold = 1.0;
  CHECK_NOTHROW(validate(ok));

  auto rejects = [](DetectorConfig cfg) {
    try {
      validate(cfg);
      return false;
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
  };
  DetectorConfig bad;
  bad.window = 0;
  CHECK(rejects(bad));
  bad = DetectorConfig{};
  bad.alert_threshold = 0.5;  // a half can tie, so it is excluded
  CHECK(rejects(bad));
  bad = DetectorConfig{};
  bad.alert_threshold = 1.0001;
  CHECK(rejects(bad));
  bad = DetectorConfig{};
  bad.alert_threshold = std::nan("");
  CHECK(rejects(bad));
  bad = DetectorConfig{};
  bad.cooldown_ms = -1;
  CHECK(rejects(bad));
}

TEST_CASE("majority window alerts on the seventh of ten") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 10;
  cfg.alert_threshold = 0.6;
  cfg.cooldown_ms = 5000;
  DetectorEngine engine(model, cfg);

  for (int i = 0; i < 6; ++i) {
    const DetectionVerdict v = engine.ingest(7, i, {100.0});
    CHECK(v.predicted == ClassLabel::SpectreV1);
    CHECK(!v.alert.has_value());  // 6/10 does not exceed 0.6
    CHECK(v.vote_fraction[1] ==
          doctest::Approx((i + 1) / 10.0).epsilon(1e-12));
  }
  const DetectionVerdict seventh = engine.ingest(7, 6, {100.0});
  REQUIRE(seventh.alert.has_value());
  CHECK(seventh.alert->attack_class == ClassLabel::SpectreV1);
  CHECK(seventh.alert->confidence == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(seventh.pid == 7);
  CHECK(seventh.timestamp_ms == 6);

  // The window keeps qualifying but the class is cooling down.
  for (int i = 7; i < 10; ++i)
    CHECK(!engine.ingest(7, i, {100.0}).alert.has_value());
  CHECK(engine.alerts() == 1);
}

TEST_CASE("vote fractions always divide by the configured window") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 50;
  DetectorEngine engine(model, cfg);
  DetectionVerdict v;
  for (int i = 0; i < 20; ++i) v = engine.ingest(3, i, {0.0});
  double total = 0.0;
  for (double f : v.vote_fraction) total += f;
  CHECK(total == doctest::Approx(20.0 / 50.0).epsilon(1e-12));

  for (int i = 20; i < 60; ++i) v = engine.ingest(3, i, {0.0});
  total = 0.0;
  for (double f : v.vote_fraction) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(v.vote_fraction[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a benign majority never alerts") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 3;
  cfg.alert_threshold = 0.6;
  DetectorEngine engine(model, cfg);
  for (int i = 0; i < 10; ++i) {
    const DetectionVerdict v = engine.ingest(5, i, {0.0});
    CHECK(v.predicted == ClassLabel::Benign);
    CHECK(!v.alert.has_value());
  }
  CHECK(engine.alerts() == 0);
}

TEST_CASE("cooldown runs on sample timestamps") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 10;
  cfg.alert_threshold = 0.6;
  cfg.cooldown_ms = 5000;
  DetectorEngine engine(model, cfg);

  for (int i = 0; i < 10; ++i) engine.ingest(7, i, {100.0});
  CHECK(engine.alerts() == 1);  // fired at ts=6, cooling until ts=5006

  CHECK(!engine.ingest(7, 5005, {100.0}).alert.has_value());
  const DetectionVerdict again = engine.ingest(7, 5006, {100.0});
  REQUIRE(again.alert.has_value());
  CHECK(again.alert->confidence == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(engine.alerts() == 2);
}

TEST_CASE("cooldown is tracked per class") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 10;
  cfg.alert_threshold = 0.6;
  cfg.cooldown_ms = 5000;
  DetectorEngine engine(model, cfg);

  for (int i = 0; i < 10; ++i) engine.ingest(7, i, {100.0});
  CHECK(engine.alerts() == 1);

  // Predictions drift to a second attack class while the first cools.
  std::optional<Alert> second;
  for (int i = 10; i < 20 && !second; ++i)
    second = engine.ingest(7, i, {200.0}).alert;
  REQUIRE(second.has_value());
  CHECK(second->attack_class == ClassLabel::SpectreV2);
  CHECK(second->confidence == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(engine.alerts() == 2);
}

TEST_CASE("cooldown is tracked per process") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 10;
  cfg.alert_threshold = 0.6;
  cfg.cooldown_ms = 5000;
  DetectorEngine engine(model, cfg);

  for (int i = 0; i < 10; ++i) engine.ingest(7, i, {100.0});
  CHECK(engine.alerts() == 1);

  // A second process accumulates its own window and alerts while the
  // first one is cooling.
  for (int i = 0; i < 7; ++i) {
    const DetectionVerdict v = engine.ingest(8, 3 + i, {100.0});
    CHECK((v.alert.has_value() == (i == 6)));
  }
  CHECK(engine.alerts() == 2);
}

TEST_CASE("forget drops window and cooldown state") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 10;
  cfg.alert_threshold = 0.6;
  cfg.cooldown_ms = 1000000;
  DetectorEngine engine(model, cfg);

  for (int i = 0; i < 10; ++i) engine.ingest(7, i, {100.0});
  CHECK(engine.alerts() == 1);
  engine.forget(7);

  // Fresh state: the window refills from scratch and the seventh sample
  // alerts despite the old never-expiring cooldown.
  for (int i = 0; i < 6; ++i)
    CHECK(!engine.ingest(7, 100 + i, {100.0}).alert.has_value());
  CHECK(engine.ingest(7, 106, {100.0}).alert.has_value());
  CHECK(engine.alerts() == 2);
}

TEST_CASE("samples ingest with their recorded pid and timestamp") {
  const TrainedModel model = prototype_model();
  DetectorConfig cfg;
  cfg.window = 1;
  cfg.alert_threshold = 0.9;
  DetectorEngine engine(model, cfg);
  Sample s;
  s.timestamp_ms = 44;
  s.pid = 9;
  s.values = {300};
  const DetectionVerdict v = engine.ingest(s);
  CHECK(v.pid == 9);
  CHECK(v.timestamp_ms == 44);
  CHECK(v.predicted == ClassLabel::Meltdown);
  REQUIRE(v.alert.has_value());
  CHECK(v.alert->attack_class == ClassLabel::Meltdown);
  CHECK(v.alert->confidence == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection reorders stream values into model order") {
  const ProjectionPlan plan =
      make_projection({"a", "b", "c"}, {"c", "a"});
  REQUIRE(plan.indices == std::vector<std::size_t>{2, 0});
  Sample s;
  s.values = {10, 20, 30};
  CHECK(project_values(s, plan) == std::vector<double>{30.0, 10.0});

  try {
    make_projection({"a", "b"}, {"z"});
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFeature);
  }

  Sample narrow;
  narrow.values = {10, 20};
  try {
    project_values(narrow, plan);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentWidth);
  }
}

TEST_CASE("run drains streams round robin") {
  const TrainedModel model = prototype_model();
  std::vector<std::unique_ptr<SampleStream>> streams;
  streams.push_back(replay_dataset(stream_rows(100, 0, {0, 0, 0}),
                                   ReplaySpeed::kUnthrottled));
  streams.push_back(replay_dataset(stream_rows(200, 0, {0, 0, 0, 0, 0}),
                                   ReplaySpeed::kUnthrottled));
  std::vector<std::int64_t> order;
  const DetectorRunSummary summary = run_detector(
      model, std::move(streams), DetectorConfig{},
      [&](const DetectionVerdict& v) { order.push_back(v.pid); });
  CHECK(summary.samples == 8);
  CHECK(summary.alerts == 0);
  CHECK(summary.dropped == 0);
  CHECK(summary.stream_errors.empty());
  CHECK(order == std::vector<std::int64_t>{100, 200, 100, 200, 100, 200,
                                           200, 200});
}

TEST_CASE("run projects each stream into the model schema") {
  const TrainedModel model = prototype_model();
  Dataset wide;
  wide.feature_names = {"pad", "f0"};
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.timestamp_ms = i;
    s.pid = 66;
    s.values = {9999, 400};
    wide.rows.push_back(std::move(s));
  }
  std::vector<std::unique_ptr<SampleStream>> streams;
  streams.push_back(replay_dataset(wide, ReplaySpeed::kUnthrottled));
  std::vector<ClassLabel> seen;
  DetectorConfig cfg;
  cfg.window = 4;
  cfg.alert_threshold = 0.6;
  const DetectorRunSummary summary = run_detector(
      model, std::move(streams), cfg,
      [&](const DetectionVerdict& v) { seen.push_back(v.predicted); });
  CHECK(summary.samples == 4);
  CHECK(summary.alerts == 1);
  for (ClassLabel c : seen) CHECK(c == ClassLabel::SpectreV4);
}

TEST_CASE("run rejects a stream that cannot satisfy the schema") {
  const TrainedModel model = prototype_model();
  Dataset other;
  other.feature_names = {"something_else"};
  Sample s;
  s.values = {1};
  other.rows.push_back(s);
  std::vector<std::unique_ptr<SampleStream>> streams;
  streams.push_back(replay_dataset(other, ReplaySpeed::kUnthrottled));
  try {
    run_detector(model, std::move(streams), DetectorConfig{}, nullptr);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFeature);
  }
}

TEST_CASE("a stream that dies is detached while the rest keep running") {
  const TrainedModel model = prototype_model();
  std::vector<std::unique_ptr<SampleStream>> streams;
  streams.push_back(std::make_unique<BrokenStream>(300, 2));
  streams.push_back(replay_dataset(stream_rows(400, 0, {0, 0, 0, 0, 0}),
                                   ReplaySpeed::kUnthrottled));
  std::size_t verdicts = 0;
  const DetectorRunSummary summary = run_detector(
      model, std::move(streams), DetectorConfig{},
      [&](const DetectionVerdict&) { ++verdicts; });
  CHECK(summary.samples == 7);  // two before the fault, five from the healthy stream
  CHECK(verdicts == 7);
  REQUIRE(summary.stream_errors.size() == 1);
  CHECK(summary.stream_errors[0].find("went away") != std::string::npos);
}

}  // TEST_SUITE

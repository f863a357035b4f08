#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "hpcd/error.hpp"
#include "hpcd/events.hpp"
#include "hpcd/profiles.hpp"
#include "hpcd/rng.hpp"

using namespace hpcd;

namespace {

ProfileLibrary scaled_library(double scale) {
  ProfileLibrary lib = default_library();
  for (auto& [name, count] : lib.train_counts)
    count = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(count) * scale));
  for (auto& [name, count] : lib.validation_counts)
    count = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(count) * scale));
  return lib;
}

std::size_t sum_counts(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [name, n] : counts) total += n;
  return total;
}

}  // namespace

TEST_SUITE("profiles") {

TEST_CASE("shipped library covers the scenario catalog") {
  const ProfileLibrary lib = default_library();
  const auto& order = scenario_order();
  REQUIRE(order.size() == 13);
  std::set<std::string> expected = {
      "stress_c",   "stress_m",      "stress_i",        "firefox",
      "video",      "spectre_v1",    "spectre_v2",      "meltdown",
      "meltdown_fast", "meltdown_nonull", "spectre_v4", "spectre_v1_alt",
      "mibench"};
  std::set<std::string> actual;
  for (const auto& name : order) actual.insert(name);
  CHECK(actual == expected);
  for (const auto& name : order) {
    const ScenarioProfile& p = lib.at(name);
    CHECK(p.name == name);
    CHECK_NOTHROW(validate_profile(p));
    // Every profile emits the complete catalog, in catalog order.
    REQUIRE(p.features.size() == catalog().size());
    for (std::size_t i = 0; i < p.features.size(); ++i)
      CHECK(p.features[i].feature == catalog()[i].name);
  }
  CHECK_THROWS_AS(lib.at("nonexistent"), Error);
}

TEST_CASE("scenario labels match their attack families") {
  const ProfileLibrary lib = default_library();
  CHECK(lib.at("stress_c").label == ClassLabel::Benign);
  CHECK(lib.at("stress_m").label == ClassLabel::Benign);
  CHECK(lib.at("stress_i").label == ClassLabel::Benign);
  CHECK(lib.at("firefox").label == ClassLabel::Benign);
  CHECK(lib.at("video").label == ClassLabel::Benign);
  CHECK(lib.at("mibench").label == ClassLabel::Benign);
  CHECK(lib.at("spectre_v1").label == ClassLabel::SpectreV1);
  CHECK(lib.at("spectre_v1_alt").label == ClassLabel::SpectreV1);
  CHECK(lib.at("spectre_v2").label == ClassLabel::SpectreV2);
  CHECK(lib.at("meltdown").label == ClassLabel::Meltdown);
  CHECK(lib.at("meltdown_fast").label == ClassLabel::Meltdown);
  CHECK(lib.at("meltdown_nonull").label == ClassLabel::Meltdown);
  CHECK(lib.at("spectre_v4").label == ClassLabel::SpectreV4);
}

TEST_CASE("shipped corpus row counts") {
  const ProfileLibrary lib = default_library();
  CHECK(lib.train_counts.at("stress_c") == 15000);
  CHECK(lib.train_counts.at("stress_m") == 15000);
  CHECK(lib.train_counts.at("stress_i") == 15000);
  CHECK(lib.train_counts.at("firefox") == 20000);
  CHECK(lib.train_counts.at("video") == 20000);
  CHECK(lib.train_counts.at("spectre_v1") == 11024);
  CHECK(lib.train_counts.at("spectre_v2") == 10305);
  CHECK(lib.train_counts.at("meltdown") == 10664);
  CHECK(lib.train_counts.at("meltdown_fast") == 10598);
  CHECK(lib.train_counts.at("meltdown_nonull") == 10564);
  CHECK(lib.train_counts.at("spectre_v4") == 14001);
  CHECK(sum_counts(lib.train_counts) == 152156);

  CHECK(lib.validation_counts.at("stress_c") == 3000);
  CHECK(lib.validation_counts.at("stress_m") == 3000);
  CHECK(lib.validation_counts.at("mibench") == 5089);
  CHECK(lib.validation_counts.at("spectre_v1_alt") == 23749);
  CHECK(sum_counts(lib.validation_counts) == 34838);
}

TEST_CASE("corpus assembly is contiguous, labeled and manifest-accurate") {
  const ProfileLibrary lib = scaled_library(0.01);
  const CorpusBuild corpus = build_corpus(lib, 5, 5);

  CHECK(corpus.train_test.size() == sum_counts(lib.train_counts));
  CHECK(corpus.validation.size() == sum_counts(lib.validation_counts));
  CHECK(corpus.train_test.feature_names.size() == 30);
  CHECK(corpus.train_manifest.rows == corpus.train_test.size());
  CHECK(corpus.train_manifest.feature_names ==
        corpus.train_test.feature_names);
  CHECK(corpus.train_manifest.seed == 5);

  // Scenario blocks are contiguous, in catalog order, with per-block pid
  // and label exactly as recorded.
  std::size_t offset = 0;
  std::set<std::int64_t> pids;
  for (const auto& s : corpus.train_manifest.scenarios) {
    CHECK(s.rows == lib.train_counts.at(s.name));
    CHECK(s.label == lib.at(s.name).label);
    pids.insert(s.pid);
    for (std::size_t i = offset; i < offset + s.rows; ++i) {
      CHECK(corpus.train_test.rows[i].pid == s.pid);
      CHECK(corpus.train_test.rows[i].label == s.label);
    }
    offset += s.rows;
  }
  CHECK(offset == corpus.train_test.size());
  CHECK(pids.size() == corpus.train_manifest.scenarios.size());

  // The manifest's class counts agree with the assembled rows.
  std::map<std::string, std::size_t> counted;
  for (const auto& [cls, n] : corpus.train_test.class_counts())
    counted[std::string(class_name(cls))] = n;
  CHECK(counted == corpus.train_manifest.class_counts);
}

TEST_CASE("scenario seeds derive from the master seed by catalog position") {
  const ProfileLibrary lib = scaled_library(0.005);
  const CorpusBuild corpus = build_corpus(lib, 99, 7);
  const auto& order = scenario_order();
  for (const auto& s : corpus.train_manifest.scenarios) {
    const std::size_t index = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), s.name) - order.begin());
    CHECK(s.seed == mix_seed(99, index));
  }
  for (const auto& s : corpus.validation_manifest.scenarios) {
    const std::size_t index = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), s.name) - order.begin());
    CHECK(s.seed == mix_seed(7, 1000 + index));
  }
}

TEST_CASE("validation seed never perturbs the train corpus") {
  const ProfileLibrary lib = scaled_library(0.005);
  const CorpusBuild a = build_corpus(lib, 3, 1);
  const CorpusBuild b = build_corpus(lib, 3, 2);
  CHECK(a.train_test == b.train_test);
  CHECK(a.validation.rows != b.validation.rows);
  // Same seeds reproduce everything bit for bit.
  const CorpusBuild c = build_corpus(lib, 3, 1);
  CHECK(a.train_test == c.train_test);
  CHECK(a.validation == c.validation);
}

TEST_CASE("validation reuses stress profiles under a fresh process") {
  const ProfileLibrary lib = scaled_library(0.01);
  const CorpusBuild corpus = build_corpus(lib, 4, 4);
  std::map<std::string, std::int64_t> train_pids, val_pids;
  for (const auto& s : corpus.train_manifest.scenarios)
    train_pids[s.name] = s.pid;
  for (const auto& s : corpus.validation_manifest.scenarios)
    val_pids[s.name] = s.pid;
  CHECK(val_pids.at("stress_c") == train_pids.at("stress_c") + 1);
  CHECK(val_pids.at("stress_m") == train_pids.at("stress_m") + 1);
}

TEST_CASE("library JSON round-trip is exact") {
  const ProfileLibrary lib = default_library();
  const std::string text = library_to_json(lib);
  const ProfileLibrary back = library_from_json(text);
  CHECK(back.train_counts == lib.train_counts);
  CHECK(back.validation_counts == lib.validation_counts);
  REQUIRE(back.profiles.size() == lib.profiles.size());
  for (const auto& [name, profile] : lib.profiles) {
    REQUIRE(back.profiles.count(name) == 1);
    CHECK(back.profiles.at(name) == profile);
  }
  CHECK_THROWS_AS(library_from_json("not json"), Error);

  const std::string path = "profiles_roundtrip.tmp.json";
  save_library(path, lib);
  const ProfileLibrary from_file = load_library(path);
  CHECK(from_file.profiles.at("spectre_v1") == lib.profiles.at("spectre_v1"));
  std::remove(path.c_str());
}

TEST_CASE("manifest JSON round-trip is exact") {
  const ProfileLibrary lib = scaled_library(0.005);
  CorpusBuild corpus = build_corpus(lib, 12, 13);
  corpus.train_manifest.trace_file = "train.csv";
  corpus.train_manifest.trace_hash = "00000000deadbeef";
  const std::string text = corpus.train_manifest.to_json();
  const DatasetManifest back = DatasetManifest::from_json(text);
  CHECK(back.seed == corpus.train_manifest.seed);
  CHECK(back.rows == corpus.train_manifest.rows);
  CHECK(back.feature_names == corpus.train_manifest.feature_names);
  CHECK(back.class_counts == corpus.train_manifest.class_counts);
  CHECK(back.trace_file == "train.csv");
  CHECK(back.trace_hash == "00000000deadbeef");
  REQUIRE(back.scenarios.size() == corpus.train_manifest.scenarios.size());
  for (std::size_t i = 0; i < back.scenarios.size(); ++i) {
    CHECK(back.scenarios[i].name == corpus.train_manifest.scenarios[i].name);
    CHECK(back.scenarios[i].label == corpus.train_manifest.scenarios[i].label);
    CHECK(back.scenarios[i].rows == corpus.train_manifest.scenarios[i].rows);
    CHECK(back.scenarios[i].pid == corpus.train_manifest.scenarios[i].pid);
    CHECK(back.scenarios[i].seed == corpus.train_manifest.scenarios[i].seed);
  }
}

TEST_CASE("calibration recovers generating parameters") {
  const ProfileLibrary lib = default_library();
  const ScenarioProfile& truth = lib.at("spectre_v1");
  Dataset draw = generate_with_seed(truth, 4000, 123, 5555);
  std::map<std::string, Dataset> by_scenario;
  by_scenario["spectre_v1"] = draw;
  const ProfileLibrary fitted = calibrate_from_traces(by_scenario);
  const ScenarioProfile& est = fitted.at("spectre_v1");
  CHECK(est.label == ClassLabel::SpectreV1);
  REQUIRE(est.features.size() == truth.features.size());
  for (std::size_t i = 0; i < truth.features.size(); ++i) {
    const FeatureDist& t = truth.features[i];
    const FeatureDist& e = est.features[i];
    CHECK(e.feature == t.feature);
    if (t.family == DistFamily::kLognormal && e.family == t.family) {
      CHECK(e.location > t.location * 0.9);
      CHECK(e.location < t.location * 1.1);
      CHECK(e.scale > t.scale * 0.7);
      CHECK(e.scale < t.scale * 1.3);
    }
  }
}

TEST_CASE("calibration falls back to the truncated gaussian on zeros") {
  ScenarioProfile p;
  p.name = "zeroish";
  p.label = ClassLabel::Meltdown;
  p.seed = 9;
  p.features = {
      {"PAGE_FAULTS", DistFamily::kGaussianTruncatedAtZero, 1.0, 3.0},
      {"LL_ACCESS", DistFamily::kLognormal, 5000.0, 0.2},
  };
  Dataset draw = generate_with_seed(p, 1000, 77, 4242);
  std::map<std::string, Dataset> by_scenario;
  by_scenario["zeroish"] = draw;
  const ProfileLibrary fitted = calibrate_from_traces(by_scenario);
  const ScenarioProfile& est = fitted.at("zeroish");
  CHECK(est.features[0].family == DistFamily::kGaussianTruncatedAtZero);
  CHECK(est.features[1].family == DistFamily::kLognormal);
}

TEST_CASE("calibration refuses thin scenarios") {
  ScenarioProfile p;
  p.name = "thin";
  p.features = {{"LL_ACCESS", DistFamily::kLognormal, 100.0, 0.1}};
  p.label = ClassLabel::Benign;
  std::map<std::string, Dataset> by_scenario;
  by_scenario["thin"] = generate_with_seed(p, 99, 1, 1);
  try {
    calibrate_from_traces(by_scenario);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewRows);
  }
}

}  // TEST_SUITE

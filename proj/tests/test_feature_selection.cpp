#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hpcd/error.hpp"
#include "hpcd/feature_selection.hpp"
#include "hpcd/rng.hpp"

using namespace hpcd;

namespace {

Dataset build(std::size_t n, std::size_t d,
              const std::function<std::uint64_t(std::size_t, std::size_t)>& value,
              const std::function<int(std::size_t)>& label) {
  Dataset ds;
  for (std::size_t f = 0; f < d; ++f)
    ds.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.timestamp_ms = static_cast<std::int64_t>(i);
    s.pid = 1;
    for (std::size_t f = 0; f < d; ++f) s.values.push_back(value(i, f));
    s.label = class_from_int(label(i));
    ds.rows.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

TEST_SUITE("feature_selection") {

TEST_CASE("forest importance finds the informative feature") {
  Rng rng(41);
  const Dataset ds = build(
      600, 5,
      [&](std::size_t i, std::size_t f) -> std::uint64_t {
        if (f == 2) {
          return 1000 + 500 * (i % 2) + rng.uniform_below(50);
        }
        return 1000 + rng.uniform_below(50);
      },
      [](std::size_t i) { return static_cast<int>(i % 2); });
  RfImportanceOptions options;
  options.trees = 40;
  options.max_depth = 8;
  const ImportanceReport report = rf_importance(ds, 40, 7, options);
  REQUIRE(report.ranking.size() == 5);
  CHECK(report.ranking[0] == "f2");
  CHECK(report.scores.at("f2") > 0.3);
  for (const auto& [name, score] : report.scores) {
    CHECK(score >= 0.0);
    if (name != "f2") CHECK(score < 0.1);
  }
  CHECK(report.method == ImportanceMethod::kRandomForest);
}

TEST_CASE("forest importance is deterministic in the seed") {
  Rng rng(42);
  const Dataset ds = build(
      300, 4,
      [&](std::size_t i, std::size_t f) -> std::uint64_t {
        return 100 + 40 * ((i + f) % 3) + rng.uniform_below(10);
      },
      [](std::size_t i) { return static_cast<int>(i % 3); });
  RfImportanceOptions options;
  options.trees = 20;
  const ImportanceReport a = rf_importance(ds, 20, 9, options);
  const ImportanceReport b = rf_importance(ds, 20, 9, options);
  CHECK(a.scores == b.scores);
  CHECK(a.ranking == b.ranking);
}

TEST_CASE("random labels yield no stable winner and near-zero scores") {
  Rng rng(55);
  const Dataset noise = build(
      400, 6,
      [&](std::size_t, std::size_t) -> std::uint64_t {
        return 500 + rng.uniform_below(1000);
      },
      [&](std::size_t) { return static_cast<int>(rng.uniform_below(5)); });
  RfImportanceOptions options;
  options.trees = 25;
  options.max_depth = 8;
  std::set<std::string> winners;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ImportanceReport report = rf_importance(noise, 25, seed, options);
    winners.insert(report.ranking[0]);
    for (const auto& [name, score] : report.scores) CHECK(score < 0.05);
  }
  CHECK(winners.size() > 1);
}

TEST_CASE("pca ranks by variance participation") {
  Rng rng(70);
  const Dataset ds = build(
      500, 3,
      [&](std::size_t i, std::size_t f) -> std::uint64_t {
        const std::uint64_t strong = 1000 + 100 * (i % 10);
        if (f == 0) return strong;
        if (f == 1) return strong + rng.uniform_below(3);  // near-copy of f0
        return 1000 + rng.uniform_below(10);
      },
      [](std::size_t i) { return static_cast<int>(i % 2); });
  const ImportanceReport report = pca_rank(ds, 1);
  CHECK(report.method == ImportanceMethod::kPca);
  REQUIRE(report.explained_variance.size() == 3);
  double total = 0.0;
  for (std::size_t c = 0; c < report.explained_variance.size(); ++c) {
    total += report.explained_variance[c];
    if (c > 0)
      CHECK(report.explained_variance[c] <= report.explained_variance[c - 1]);
  }
  CHECK(std::abs(total - 1.0) < 1e-9);
  // The top component carries the correlated pair; the noise column ranks
  // last.
  CHECK(report.ranking[2] == "f2");
}

TEST_CASE("pca flags rank deficiency but still reports") {
  const Dataset ds = build(
      50, 2,
      [](std::size_t i, std::size_t) -> std::uint64_t { return 10 + i; },
      [](std::size_t i) { return static_cast<int>(i % 2); });
  // Two identical columns: correlation matrix has rank 1.
  const ImportanceReport report = pca_rank(ds, 2);
  REQUIRE(!report.warnings.empty());
  CHECK(report.warnings[0].find("DegenerateCovariance") != std::string::npos);
  CHECK_THROWS_AS(pca_rank(ds, 0), Error);
  CHECK_THROWS_AS(pca_rank(ds, 3), Error);
}

TEST_CASE("select_features breaks exact ties by catalog order") {
  ImportanceReport report;
  report.scores = {{"DTLB_READ", 0.5},
                   {"LL_ACCESS", 0.5},
                   {"made_up", 0.5},
                   {"BPU_MISS", 0.2}};
  report.ranking = {"DTLB_READ", "LL_ACCESS", "made_up", "BPU_MISS"};
  const auto picked = select_features(report, 2);
  REQUIRE(picked.size() == 2);
  // LL_ACCESS (catalog id 20) precedes DTLB_READ (id 22); non-catalog names
  // sort after all catalog entries.
  CHECK(picked[0] == "LL_ACCESS");
  CHECK(picked[1] == "DTLB_READ");
}

TEST_CASE("distribution summaries follow manifest provenance") {
  const Dataset ds = build(
      100, 2,
      [](std::size_t i, std::size_t f) -> std::uint64_t {
        if (f == 0) return i < 50 ? 7 : 100 + i;  // constant in block one
        return 10 * i;
      },
      [](std::size_t i) { return i < 50 ? 0 : 3; });
  DatasetManifest manifest;
  manifest.rows = 100;
  manifest.feature_names = ds.feature_names;
  manifest.scenarios = {
      {"alpha", ClassLabel::Benign, 50, 11, 0},
      {"beta", ClassLabel::Meltdown, 50, 12, 0},
  };
  const auto summaries = distribution_summary(ds, manifest);
  REQUIRE(summaries.size() == 4);  // 2 scenarios x 2 features
  const DistributionSummary& alpha_f0 = summaries[0];
  CHECK(alpha_f0.scenario == "alpha");
  CHECK(alpha_f0.feature == "f0");
  CHECK(alpha_f0.count == 50);
  CHECK(alpha_f0.min == 7.0);
  CHECK(alpha_f0.max == 7.0);
  CHECK(alpha_f0.median == 7.0);
  CHECK(alpha_f0.stddev == 0.0);
  const DistributionSummary& beta_f0 = summaries[2];
  CHECK(beta_f0.scenario == "beta");
  CHECK(beta_f0.min == 150.0);
  CHECK(beta_f0.max == 199.0);
  for (const auto& s : summaries) {
    CHECK(s.histogram.size() == kHistogramBins);
    CHECK(std::accumulate(s.histogram.begin(), s.histogram.end(),
                          std::size_t{0}) == s.count);
    CHECK(s.min <= s.p25);
    CHECK(s.p25 <= s.median);
    CHECK(s.median <= s.p75);
    CHECK(s.p75 <= s.max);
  }

  DatasetManifest bad = manifest;
  bad.scenarios[1].rows = 49;
  CHECK_THROWS_AS(distribution_summary(ds, bad), Error);
  bad = manifest;
  bad.feature_names = {"x", "y"};
  CHECK_THROWS_AS(distribution_summary(ds, bad), Error);
}

TEST_CASE("label grouping covers every labeled class") {
  const Dataset ds = build(
      60, 1,
      [](std::size_t i, std::size_t) -> std::uint64_t { return i; },
      [](std::size_t i) { return static_cast<int>(i % 5); });
  const auto summaries = distribution_summary_by_label(ds);
  REQUIRE(summaries.size() == 5);
  std::set<std::string> groups;
  for (const auto& s : summaries) {
    groups.insert(s.scenario);
    CHECK(s.count == 12);
  }
  CHECK(groups ==
        std::set<std::string>{"benign", "spectre_v1", "spectre_v2",
                              "meltdown", "spectre_v4"});
}

TEST_CASE("rendered reports are deterministic and self-describing") {
  Rng rng(81);
  const Dataset ds = build(
      120, 3,
      [&](std::size_t, std::size_t) -> std::uint64_t {
        return rng.uniform_below(100);
      },
      [](std::size_t i) { return static_cast<int>(i % 2); });
  RfImportanceOptions options;
  options.trees = 10;
  const ImportanceReport report = rf_importance(ds, 10, 3, options);
  const std::string a = render_importance_report(report);
  const std::string b = render_importance_report(report);
  CHECK(a == b);
  CHECK(a.find("f0") != std::string::npos);
  CHECK(a.find("selected") != std::string::npos);

  DatasetManifest manifest;
  manifest.rows = 120;
  manifest.feature_names = ds.feature_names;
  manifest.scenarios = {{"only", ClassLabel::Benign, 120, 5, 0}};
  const auto summaries = distribution_summary(ds, manifest);
  const std::string r = render_distribution_report(summaries);
  CHECK(r.find("only") != std::string::npos);
  CHECK(r.find("median") != std::string::npos);
}

}  // TEST_SUITE

#ifndef HPCD_FEATURE_SELECTION_HPP_
#define HPCD_FEATURE_SELECTION_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpcd/dataset.hpp"
#include "hpcd/profiles.hpp"

namespace hpcd {

enum class ImportanceMethod {
  kRandomForest,
  kPca,
};

const char* importance_method_name(ImportanceMethod method);

struct ImportanceReport {
  ImportanceMethod method = ImportanceMethod::kRandomForest;
  std::map<std::string, double> scores;
  std::vector<std::string> ranking;   // descending score, catalog_id tiebreak
  std::vector<std::string> selected;  // top-4 by default
  std::vector<double> explained_variance;  // PCA only, ratios summing to 1
  std::vector<std::string> warnings;
};

struct RfImportanceOptions {
  std::size_t trees = 100;
  int max_depth = 12;
  std::size_t min_leaf = 5;
  unsigned threads = 1;
};

/// Out-of-bag permutation importance over a forest with per-node feature
/// subsampling of size ceil(sqrt(d)). Scores are mean per-tree OOB accuracy
/// drops clamped at zero, so their sum equals the total accuracy drop
/// attributed across features.
ImportanceReport rf_importance(const Dataset& dataset, std::size_t trees,
                               std::uint64_t seed,
                               const RfImportanceOptions& options = {});

/// Principal components of the z-scored feature matrix (constant features
/// stay at zero). Feature score = sum over the top-m components of
/// |loading| * explained-variance ratio. Rank-deficient inputs are allowed
/// and flagged with a DegenerateCovariance warning.
ImportanceReport pca_rank(const Dataset& dataset, std::size_t m);

/// Top-m names by score; exact ties prefer the lower catalog_id (names
/// outside the catalog order after it, alphabetically).
std::vector<std::string> select_features(const ImportanceReport& report,
                                         std::size_t m = 4);

struct DistributionSummary {
  std::string scenario;
  std::string feature;
  std::size_t count = 0;
  double min = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<std::size_t> histogram;  // kHistogramBins over [min, max]
};

inline constexpr std::size_t kHistogramBins = 20;

/// Per (scenario, feature) summaries using the manifest's row provenance
/// (scenario blocks are contiguous in assembly order).
std::vector<DistributionSummary> distribution_summary(
    const Dataset& dataset, const DatasetManifest& manifest);

/// Fallback grouping by class label when no manifest is available.
std::vector<DistributionSummary> distribution_summary_by_label(
    const Dataset& dataset);

std::string render_importance_report(const ImportanceReport& report);
std::string render_distribution_report(
    const std::vector<DistributionSummary>& summaries);

}  // namespace hpcd

#endif  // HPCD_FEATURE_SELECTION_HPP_

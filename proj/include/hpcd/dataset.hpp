#ifndef HPCD_DATASET_HPP_
#define HPCD_DATASET_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpcd/sample.hpp"

namespace hpcd {

/// Ordered collection of Samples sharing one feature-name header. Immutable
/// by convention once built; all mutation happens through the named
/// operations, which copy.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Sample> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return feature_names.size(); }

  /// Labeled row counts per class. Unlabeled rows are not counted.
  std::map<ClassLabel, std::size_t> class_counts() const;

  /// Throws Error{InconsistentWidth} if any row width differs from the
  /// header, Error{MalformedTrace} on other invariant violations.
  void check_consistent() const;

  /// Column subset/reorder by feature name; throws Error{MissingFeature}.
  Dataset project(const std::vector<std::string>& names) const;

  /// Row-major n x d feature matrix as doubles.
  std::vector<double> feature_matrix() const;

  /// Labels as 0..4 ints; throws Error{UnlabeledData} if any row lacks one.
  std::vector<int> labels() const;

  bool operator==(const Dataset&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Random 8:2-style partition. Stratified mode preserves per-class
/// proportions within one row per class. Deterministic under seed.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

/// Shuffled fold assignment: returns k disjoint holdout index sets covering
/// 0..n-1, sizes differing by at most 1.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    std::uint64_t seed);

/// Materialized K-fold partition as (train, holdout) dataset pairs.
std::vector<std::pair<Dataset, Dataset>> kfold(const Dataset& dataset, int k,
                                               std::uint64_t seed);

/// Per-feature z-score parameters fitted on training rows only.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> stddevs);

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stddevs() const { return stddevs_; }
  std::size_t width() const { return means_.size(); }

  /// (x - mean) / stddev per feature; constant features map to 0.
  void transform(std::vector<double>& values) const;
  std::vector<double> transformed(const std::vector<double>& values) const;

  static constexpr double kStddevFloor = 1e-12;

 private:
  std::vector<double> means_;
  std::vector<double> stddevs_;
};

Standardizer fit_standardizer(const Dataset& train);

/// Applies the standardizer to every row, yielding a double matrix in the
/// dataset's row order.
std::vector<double> apply_standardizer(const Standardizer& standardizer,
                                       const Dataset& dataset);

}  // namespace hpcd

#endif  // HPCD_DATASET_HPP_

#ifndef HPCD_FOREST_HPP_
#define HPCD_FOREST_HPP_

#include <cstdint>
#include <vector>

#include "hpcd/tree.hpp"

namespace hpcd {

struct ForestParams {
  std::size_t trees = 100;
  int max_depth = 12;
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;    // 0: ceil(sqrt(d))
  std::uint64_t seed = 0;
  unsigned threads = 1;    // 0: hardware concurrency
};

struct ForestTree {
  Tree tree;
  std::vector<std::uint32_t> oob;  // rows the bootstrap left out, ascending
};

class Forest {
 public:
  Forest(std::vector<ForestTree> trees, int num_classes);

  /// Majority vote over trees; ties resolve to the lowest class value.
  int predict(const double* row) const;
  const std::vector<ForestTree>& trees() const { return trees_; }
  int num_classes() const { return num_classes_; }

 private:
  std::vector<ForestTree> trees_;
  int num_classes_;
};

/// Bootstrap + per-node feature subsampling over one presorted matrix.
/// Per-tree seeds derive from params.seed by tree index, so any thread
/// count yields the identical forest.
Forest train_forest(const TreeTrainer& trainer, const ForestParams& params);

/// Mean per-tree out-of-bag accuracy drop per feature, clamped at zero.
/// Permutations derive from `seed` by (tree, feature), independent of the
/// training seed.
std::vector<double> oob_permutation_importance(const TreeTrainer& trainer,
                                               const Forest& forest,
                                               std::uint64_t seed,
                                               unsigned threads = 1);

}  // namespace hpcd

#endif  // HPCD_FOREST_HPP_

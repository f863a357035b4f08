#ifndef HPCD_TREE_HPP_
#define HPCD_TREE_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hpcd {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with value < threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t label = 0;     // weighted majority class of the node

  bool operator==(const TreeNode&) const = default;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes);

  /// row is indexed by feature id and must cover every feature the tree
  /// tests.
  int predict(const double* row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool empty() const { return nodes_.empty(); }
  /// Highest feature index the tree tests, -1 for a single leaf.
  int max_feature() const;

  void serialize(std::ostream& out) const;
  static Tree deserialize(std::istream& in);

  bool operator==(const Tree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeGrowParams {
  int max_depth = 3;
  std::size_t min_leaf = 1;
  std::size_t mtry = 0;    // 0: every feature is a candidate at every node
  std::uint64_t seed = 0;  // drives only the per-node mtry draw
};

/// Weighted CART with Gini impurity. Columns are presorted once at
/// construction; each train() then costs O(max_depth * d * n) regardless of
/// the weight vector, which is what makes boosting rounds and bootstrap
/// replicas over the same matrix affordable. Split search is exact
/// (midpoints between adjacent distinct in-node values); ties prefer the
/// lower feature index, then the lower threshold.
class TreeTrainer {
 public:
  /// x column-major (x[f * n + i]), y in [0, num_classes). Both referenced,
  /// not copied; they must outlive the trainer.
  TreeTrainer(const double* x, const int* y, std::size_t n, std::size_t d,
              int num_classes);

  /// weights: one per row, >= 0; rows with weight 0 are excluded. min_leaf
  /// counts distinct included rows.
  Tree train(const std::vector<double>& weights,
             const TreeGrowParams& params) const;
  Tree train_unweighted(const TreeGrowParams& params) const;

  std::size_t rows() const { return n_; }
  std::size_t features() const { return d_; }
  int num_classes() const { return k_; }
  const double* matrix() const { return x_; }
  const int* labels() const { return y_; }

 private:
  const double* x_;
  const int* y_;
  std::size_t n_;
  std::size_t d_;
  int k_;
  std::vector<std::vector<std::uint32_t>> sorted_;
};

}  // namespace hpcd

#endif  // HPCD_TREE_HPP_

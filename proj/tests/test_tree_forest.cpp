#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "hpcd/forest.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/tree.hpp"

using namespace hpcd;

namespace {

// Single-feature, three well-separated clusters: 0 at 1..5, 1 at 11..14,
// 2 at 21..23. A depth-1 stump must cut at 8 and give up on class 2.
struct HandData {
  std::vector<double> x = {1, 2, 3, 4, 5, 11, 12, 13, 14, 21, 22, 23};
  std::vector<int> y = {0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2};
};

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::string serialized(const Tree& tree) {
  std::ostringstream out;
  tree.serialize(out);
  return out.str();
}

}  // namespace

TEST_SUITE("tree_forest") {

TEST_CASE("stump on the hand dataset splits at 8") {
  HandData data;
  TreeTrainer trainer(data.x.data(), data.y.data(), data.x.size(), 1, 3);
  TreeGrowParams params;
  params.max_depth = 1;
  const Tree tree = trainer.train(uniform_weights(12), params);
  REQUIRE(tree.nodes().size() == 3);
  const TreeNode& root = tree.nodes()[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold == 8.0);
  CHECK(tree.predict(std::vector<double>{3.0}.data()) == 0);
  CHECK(tree.predict(std::vector<double>{12.0}.data()) == 1);
  // The right leaf holds classes 1 and 2; the majority is 1.
  CHECK(tree.predict(std::vector<double>{22.0}.data()) == 1);
}

TEST_CASE("weights steer the split") {
  HandData data;
  TreeTrainer trainer(data.x.data(), data.y.data(), data.x.size(), 1, 3);
  TreeGrowParams params;
  params.max_depth = 1;
  // Class 2 carries most of the mass, so separating it wins.
  std::vector<double> w(12, 0.02);
  for (std::size_t i = 9; i < 12; ++i) w[i] = 0.94 / 3.0;
  const Tree tree = trainer.train(w, params);
  CHECK(tree.nodes()[0].threshold == 17.5);
  CHECK(tree.predict(std::vector<double>{22.0}.data()) == 2);
}

TEST_CASE("zero-weight rows are excluded from training") {
  HandData data;
  TreeTrainer trainer(data.x.data(), data.y.data(), data.x.size(), 1, 3);
  TreeGrowParams params;
  params.max_depth = 1;
  std::vector<double> w = uniform_weights(12);
  for (std::size_t i = 5; i < 9; ++i) w[i] = 0.0;  // drop class 1 entirely
  const Tree tree = trainer.train(w, params);
  CHECK(tree.nodes()[0].threshold == 13.0);  // midpoint of 5 and 21
  CHECK(tree.predict(std::vector<double>{22.0}.data()) == 2);
}

TEST_CASE("depth 2 fits the hand dataset exactly") {
  HandData data;
  TreeTrainer trainer(data.x.data(), data.y.data(), data.x.size(), 1, 3);
  TreeGrowParams params;
  params.max_depth = 2;
  const Tree tree = trainer.train(uniform_weights(12), params);
  for (std::size_t i = 0; i < data.x.size(); ++i)
    CHECK(tree.predict(&data.x[i]) == data.y[i]);
}

TEST_CASE("pure nodes stop early") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<int> y = {1, 1, 1, 1};
  TreeTrainer trainer(x.data(), y.data(), 4, 1, 3);
  TreeGrowParams params;
  params.max_depth = 5;
  const Tree tree = trainer.train(uniform_weights(4), params);
  REQUIRE(tree.nodes().size() == 1);
  CHECK(tree.nodes()[0].feature == -1);
  CHECK(tree.nodes()[0].label == 1);
}

TEST_CASE("min_leaf counts distinct rows") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<int> y = {0, 0, 0, 1, 1, 1};
  TreeTrainer trainer(x.data(), y.data(), 6, 1, 2);
  TreeGrowParams params;
  params.max_depth = 3;
  params.min_leaf = 4;
  // Any split leaves one side with fewer than 4 rows, so the root stays a
  // leaf.
  const Tree tree = trainer.train(uniform_weights(6), params);
  CHECK(tree.nodes().size() == 1);
  params.min_leaf = 3;
  const Tree split_tree = trainer.train(uniform_weights(6), params);
  CHECK(split_tree.nodes().size() == 3);
  CHECK(split_tree.nodes()[0].threshold == 3.5);
}

TEST_CASE("exact ties prefer the lower feature, then lower threshold") {
  // Two identical columns: both split the data perfectly; feature 0 wins.
  std::vector<double> x = {1, 2, 3, 4, 1, 2, 3, 4};  // column-major, d=2
  std::vector<int> y = {0, 0, 1, 1};
  TreeTrainer trainer(x.data(), y.data(), 4, 2, 2);
  TreeGrowParams params;
  params.max_depth = 1;
  const Tree tree = trainer.train(uniform_weights(4), params);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold == 2.5);
}

TEST_CASE("training is deterministic under mtry subsampling") {
  Rng rng(31);
  const std::size_t n = 300, d = 6;
  std::vector<double> x(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.uniform_below(3));
    for (std::size_t f = 0; f < d; ++f)
      x[f * n + i] = rng.normal(static_cast<double>(y[i] * (f + 1)), 1.0);
  }
  TreeTrainer trainer(x.data(), y.data(), n, d, 3);
  TreeGrowParams params;
  params.max_depth = 4;
  params.mtry = 2;
  params.seed = 5;
  const Tree a = trainer.train(uniform_weights(n), params);
  const Tree b = trainer.train(uniform_weights(n), params);
  CHECK(a == b);
  params.seed = 6;
  const Tree c = trainer.train(uniform_weights(n), params);
  CHECK(serialized(a) != serialized(c));
}

TEST_CASE("serialization round-trips exactly") {
  HandData data;
  TreeTrainer trainer(data.x.data(), data.y.data(), data.x.size(), 1, 3);
  TreeGrowParams params;
  params.max_depth = 2;
  const Tree tree = trainer.train(uniform_weights(12), params);
  std::stringstream buffer;
  tree.serialize(buffer);
  const Tree back = Tree::deserialize(buffer);
  CHECK(back == tree);
  CHECK(serialized(back) == serialized(tree));
}

TEST_CASE("forest reaches high train accuracy on separable blobs") {
  Rng rng(8);
  const std::size_t n = 600, d = 4;
  std::vector<double> x(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.uniform_below(3));
    for (std::size_t f = 0; f < d; ++f)
      x[f * n + i] = rng.normal(static_cast<double>(y[i]) * 8.0, 1.0);
  }
  TreeTrainer trainer(x.data(), y.data(), n, d, 3);
  ForestParams params;
  params.trees = 25;
  params.max_depth = 6;
  params.seed = 17;
  const Forest forest = train_forest(trainer, params);
  REQUIRE(forest.trees().size() == 25);
  std::size_t correct = 0;
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) row[f] = x[f * n + i];
    if (forest.predict(row.data()) == y[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(n) > 0.99);

  // Out-of-bag sets are sorted, distinct, and plausible in size (~37%).
  double oob_mean = 0.0;
  for (const auto& ft : forest.trees()) {
    CHECK(std::is_sorted(ft.oob.begin(), ft.oob.end()));
    CHECK(std::set<std::uint32_t>(ft.oob.begin(), ft.oob.end()).size() ==
          ft.oob.size());
    oob_mean += static_cast<double>(ft.oob.size());
  }
  oob_mean /= static_cast<double>(forest.trees().size());
  CHECK(oob_mean > 0.25 * static_cast<double>(n));
  CHECK(oob_mean < 0.50 * static_cast<double>(n));
}

TEST_CASE("forests are reproducible and thread-count independent") {
  Rng rng(9);
  const std::size_t n = 200, d = 3;
  std::vector<double> x(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.uniform_below(2));
    for (std::size_t f = 0; f < d; ++f)
      x[f * n + i] = rng.normal(static_cast<double>(y[i]) * 3.0, 1.0);
  }
  TreeTrainer trainer(x.data(), y.data(), n, d, 2);
  ForestParams params;
  params.trees = 12;
  params.max_depth = 4;
  params.seed = 77;
  params.threads = 1;
  const Forest a = train_forest(trainer, params);
  params.threads = 4;
  const Forest b = train_forest(trainer, params);
  REQUIRE(a.trees().size() == b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    CHECK(a.trees()[t].tree == b.trees()[t].tree);
    CHECK(a.trees()[t].oob == b.trees()[t].oob);
  }

  const auto imp_a = oob_permutation_importance(trainer, a, 5, 1);
  const auto imp_b = oob_permutation_importance(trainer, b, 5, 4);
  CHECK(imp_a == imp_b);
}

TEST_CASE("permutation importance isolates the informative feature") {
  Rng rng(10);
  const std::size_t n = 500, d = 3;
  std::vector<double> x(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.uniform_below(2));
    x[0 * n + i] = rng.normal(static_cast<double>(y[i]) * 10.0, 1.0);
    x[1 * n + i] = rng.normal(0.0, 1.0);  // noise
    x[2 * n + i] = 42.0;                  // constant: no tree can use it
  }
  TreeTrainer trainer(x.data(), y.data(), n, d, 2);
  ForestParams params;
  params.trees = 40;
  params.max_depth = 4;
  params.seed = 3;
  const Forest forest = train_forest(trainer, params);
  const auto scores = oob_permutation_importance(trainer, forest, 11);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] > 0.3);
  CHECK(scores[1] < 0.15);
  CHECK(scores[0] > 3.0 * scores[1]);
  CHECK(scores[2] == 0.0);  // never tested by any tree, exactly zero drop
  for (double s : scores) CHECK(s >= 0.0);
}

}  // TEST_SUITE

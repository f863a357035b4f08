#include "hpcd/tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "hpcd/error.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/util.hpp"

namespace hpcd {

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  for (const auto& node : nodes_) {
    if (node.feature >= 0) {
      auto n = static_cast<std::int32_t>(nodes_.size());
      if (node.left < 0 || node.left >= n || node.right < 0 ||
          node.right >= n) {
        throw Error(ErrorCode::CorruptModel, "tree child index out of range");
      }
    }
  }
}

int Tree::predict(const double* row) const {
  if (nodes_.empty()) {
    throw Error(ErrorCode::CorruptModel, "empty tree cannot predict");
  }
  std::int32_t at = 0;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(at)];
    at = row[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(at)].label;
}

int Tree::max_feature() const {
  int best = -1;
  for (const auto& node : nodes_) {
    if (node.feature > best) best = node.feature;
  }
  return best;
}

void Tree::serialize(std::ostream& out) const {
  out << "tree " << nodes_.size() << '\n';
  for (const auto& node : nodes_) {
    out << node.feature << ' ' << format_double(node.threshold) << ' '
        << node.left << ' ' << node.right << ' ' << node.label << '\n';
  }
}

Tree Tree::deserialize(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "tree") {
    throw Error(ErrorCode::CorruptModel, "expected a tree header");
  }
  std::vector<TreeNode> nodes(count);
  for (auto& node : nodes) {
    std::string threshold;
    if (!(in >> node.feature >> threshold >> node.left >> node.right >>
          node.label)) {
      throw Error(ErrorCode::CorruptModel, "truncated tree body");
    }
    node.threshold = parse_double(threshold);
  }
  return Tree(std::move(nodes));
}

TreeTrainer::TreeTrainer(const double* x, const int* y, std::size_t n,
                         std::size_t d, int num_classes)
    : x_(x), y_(y), n_(n), d_(d), k_(num_classes) {
  if (n == 0 || d == 0) {
    throw Error(ErrorCode::TooFewRows, "cannot train trees on an empty matrix");
  }
  if (num_classes < 2) {
    throw Error(ErrorCode::SingleClass, "need at least two classes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] < 0 || y[i] >= num_classes) {
      throw Error(ErrorCode::MalformedTrace, "label outside the class set");
    }
  }
  for (std::size_t v = 0; v < n * d; ++v) {
    if (!std::isfinite(x[v])) {
      throw Error(ErrorCode::NonFiniteFeature, "matrix holds a non-finite value");
    }
  }
  sorted_.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& order = sorted_[f];
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    const double* col = x_ + f * n_;
    std::stable_sort(order.begin(), order.end(),
                     [col](std::uint32_t a, std::uint32_t b) {
                       return col[a] < col[b];
                     });
  }
}

Tree TreeTrainer::train_unweighted(const TreeGrowParams& params) const {
  return train(std::vector<double>(n_, 1.0), params);
}

namespace {

struct LevelNode {
  double total_w = 0.0;
  std::size_t count = 0;
  int depth = 0;
  bool splittable = false;
  double best_proxy = 0.0;
  std::int32_t best_feature = -1;
  double best_threshold = 0.0;
  std::vector<std::uint64_t> candidate_mask;  // empty: all features
};

bool mask_has(const std::vector<std::uint64_t>& mask, std::size_t f) {
  if (mask.empty()) return true;
  return (mask[f >> 6] >> (f & 63)) & 1u;
}

}  // namespace

Tree TreeTrainer::train(const std::vector<double>& weights,
                        const TreeGrowParams& params) const {
  if (weights.size() != n_) {
    throw Error(ErrorCode::InvalidConfig, "weight vector width mismatch");
  }
  if (params.max_depth < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_depth must be at least 1");
  }
  const std::size_t min_leaf = std::max<std::size_t>(params.min_leaf, 1);
  const auto K = static_cast<std::size_t>(k_);

  std::vector<std::int32_t> node_of_row(n_, -1);
  std::vector<TreeNode> nodes;
  nodes.emplace_back();

  // class_w holds per-active-node class weight totals, contiguous by slot.
  std::vector<double> class_w(K, 0.0);
  std::vector<LevelNode> level(1);
  level[0].depth = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (weights[i] < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "negative sample weight");
    }
    if (weights[i] == 0.0) continue;
    node_of_row[i] = 0;
    level[0].total_w += weights[i];
    level[0].count += 1;
    class_w[static_cast<std::size_t>(y_[i])] += weights[i];
  }
  if (level[0].count == 0) {
    throw Error(ErrorCode::TooFewRows, "every sample weight is zero");
  }

  Rng rng(params.seed);
  const std::size_t mask_words = (d_ + 63) / 64;
  std::vector<std::size_t> feature_scratch(d_);

  std::int32_t level_base = 0;
  while (!level.empty()) {
    const std::size_t m = level.size();

    bool any_splittable = false;
    for (std::size_t s = 0; s < m; ++s) {
      LevelNode& node = level[s];
      std::size_t populated = 0;
      for (std::size_t k = 0; k < K; ++k) {
        if (class_w[s * K + k] > 0.0) ++populated;
      }
      int majority = 0;
      double majority_w = -1.0;
      for (std::size_t k = 0; k < K; ++k) {
        if (class_w[s * K + k] > majority_w) {
          majority_w = class_w[s * K + k];
          majority = static_cast<int>(k);
        }
      }
      nodes[static_cast<std::size_t>(level_base) + s].label = majority;

      node.splittable = node.depth < params.max_depth && populated >= 2 &&
                        node.count >= 2 * min_leaf;
      if (!node.splittable) continue;
      any_splittable = true;

      double parent_proxy = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        parent_proxy += class_w[s * K + k] * class_w[s * K + k];
      }
      parent_proxy /= node.total_w;
      node.best_proxy = parent_proxy + 1e-10 * (parent_proxy + 1.0);
      node.best_feature = -1;

      if (params.mtry > 0 && params.mtry < d_) {
        node.candidate_mask.assign(mask_words, 0);
        for (std::size_t f = 0; f < d_; ++f) feature_scratch[f] = f;
        for (std::size_t pick = 0; pick < params.mtry; ++pick) {
          std::size_t j = pick + rng.index_below(d_ - pick);
          std::swap(feature_scratch[pick], feature_scratch[j]);
          std::size_t f = feature_scratch[pick];
          node.candidate_mask[f >> 6] |= 1ull << (f & 63);
        }
      }
    }
    if (!any_splittable) break;

    std::vector<double> left_w(m);
    std::vector<std::size_t> left_cnt(m);
    std::vector<double> left_cls(m * K);
    std::vector<double> prev_val(m);

    for (std::size_t f = 0; f < d_; ++f) {
      std::fill(left_w.begin(), left_w.end(), 0.0);
      std::fill(left_cnt.begin(), left_cnt.end(), 0);
      std::fill(left_cls.begin(), left_cls.end(), 0.0);
      const double* col = x_ + f * n_;
      const auto& order = sorted_[f];

      for (std::size_t pos = 0; pos < n_; ++pos) {
        const std::uint32_t i = order[pos];
        const std::int32_t node_id = node_of_row[i];
        if (node_id < level_base) continue;
        const auto s = static_cast<std::size_t>(node_id - level_base);
        LevelNode& node = level[s];
        if (!node.splittable || !mask_has(node.candidate_mask, f)) continue;

        const double v = col[i];
        if (left_cnt[s] > 0 && v > prev_val[s] &&
            left_cnt[s] >= min_leaf && node.count - left_cnt[s] >= min_leaf) {
          const double wl = left_w[s];
          const double wr = node.total_w - wl;
          if (wl > 0.0 && wr > 0.0) {
            double proxy_l = 0.0;
            double proxy_r = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
              const double lc = left_cls[s * K + k];
              const double rc = class_w[s * K + k] - lc;
              proxy_l += lc * lc;
              proxy_r += rc * rc;
            }
            const double proxy = proxy_l / wl + proxy_r / wr;
            if (proxy > node.best_proxy) {
              node.best_proxy = proxy;
              node.best_feature = static_cast<std::int32_t>(f);
              node.best_threshold = prev_val[s] + (v - prev_val[s]) / 2.0;
            }
          }
        }
        left_w[s] += weights[i];
        left_cnt[s] += 1;
        left_cls[s * K + static_cast<std::size_t>(y_[i])] += weights[i];
        prev_val[s] = v;
      }
    }

    // Materialize the chosen splits and route rows to the next level.
    std::vector<LevelNode> next;
    std::vector<double> next_class_w;
    for (std::size_t s = 0; s < m; ++s) {
      LevelNode& node = level[s];
      if (!node.splittable || node.best_feature < 0) {
        node.splittable = false;
        continue;
      }
      TreeNode& parent = nodes[static_cast<std::size_t>(level_base) + s];
      parent.feature = node.best_feature;
      parent.threshold = node.best_threshold;
      parent.left = static_cast<std::int32_t>(nodes.size());
      parent.right = parent.left + 1;
      nodes.emplace_back();
      nodes.emplace_back();
      next.emplace_back();
      next.emplace_back();
      next[next.size() - 2].depth = node.depth + 1;
      next[next.size() - 1].depth = node.depth + 1;
    }
    next_class_w.assign(next.size() * K, 0.0);

    const auto next_base = static_cast<std::int32_t>(nodes.size() - next.size());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::int32_t node_id = node_of_row[i];
      if (node_id < level_base) continue;
      const TreeNode& parent = nodes[static_cast<std::size_t>(node_id)];
      if (parent.feature < 0) continue;
      const std::int32_t child =
          x_[static_cast<std::size_t>(parent.feature) * n_ + i] <
                  parent.threshold
              ? parent.left
              : parent.right;
      node_of_row[i] = child;
      const auto cs = static_cast<std::size_t>(child - next_base);
      next[cs].total_w += weights[i];
      next[cs].count += 1;
      next_class_w[cs * K + static_cast<std::size_t>(y_[i])] += weights[i];
    }

    level = std::move(next);
    class_w = std::move(next_class_w);
    level_base = next_base;
  }

  return Tree(std::move(nodes));
}

}  // namespace hpcd

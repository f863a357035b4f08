#include "hpcd/forest.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "hpcd/error.hpp"
#include "hpcd/rng.hpp"

namespace hpcd {

Forest::Forest(std::vector<ForestTree> trees, int num_classes)
    : trees_(std::move(trees)), num_classes_(num_classes) {
  if (trees_.empty()) {
    throw Error(ErrorCode::InvalidConfig, "forest needs at least one tree");
  }
}

int Forest::predict(const double* row) const {
  std::vector<int> votes(static_cast<std::size_t>(num_classes_), 0);
  for (const auto& member : trees_) {
    ++votes[static_cast<std::size_t>(member.tree.predict(row))];
  }
  int best = 0;
  for (int k = 1; k < num_classes_; ++k) {
    if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return best;
}

namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(index) for every index in [0, count) across `threads` workers.
/// Work is claimed by atomic counter; fn must write only to index-owned
/// state.
template <typename Fn>
void parallel_indexed(std::size_t count, unsigned threads, const Fn& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Forest train_forest(const TreeTrainer& trainer, const ForestParams& params) {
  if (params.trees == 0) {
    throw Error(ErrorCode::InvalidConfig, "forest needs at least one tree");
  }
  const std::size_t n = trainer.rows();
  const std::size_t d = trainer.features();
  TreeGrowParams grow;
  grow.max_depth = params.max_depth;
  grow.min_leaf = params.min_leaf;
  grow.mtry = params.mtry != 0
                  ? params.mtry
                  : static_cast<std::size_t>(
                        std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<ForestTree> members(params.trees);
  parallel_indexed(params.trees, params.threads, [&](std::size_t t) {
    Rng bootstrap_rng(mix_seed(params.seed, 2 * t));
    std::vector<double> weights(n, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) {
      weights[bootstrap_rng.index_below(n)] += 1.0;
    }
    ForestTree member;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0.0) {
        member.oob.push_back(static_cast<std::uint32_t>(i));
      }
    }
    TreeGrowParams tree_grow = grow;
    tree_grow.seed = mix_seed(params.seed, 2 * t + 1);
    member.tree = trainer.train(weights, tree_grow);
    members[t] = std::move(member);
  });
  return Forest(std::move(members), trainer.num_classes());
}

std::vector<double> oob_permutation_importance(const TreeTrainer& trainer,
                                               const Forest& forest,
                                               std::uint64_t seed,
                                               unsigned threads) {
  const std::size_t n = trainer.rows();
  const std::size_t d = trainer.features();
  const double* x = trainer.matrix();
  const int* y = trainer.labels();
  const std::size_t tree_count = forest.trees().size();

  // drops[t * d + f] = accuracy drop of tree t when feature f is permuted.
  std::vector<double> drops(tree_count * d, 0.0);
  parallel_indexed(tree_count, threads, [&](std::size_t t) {
    const ForestTree& member = forest.trees()[t];
    const std::size_t m = member.oob.size();
    if (m == 0) return;

    std::vector<std::uint64_t> used((d + 63) / 64, 0);
    for (const auto& node : member.tree.nodes()) {
      if (node.feature >= 0) {
        used[static_cast<std::size_t>(node.feature) >> 6] |=
            1ull << (node.feature & 63);
      }
    }

    // Row-major copy of the OOB rows so column permutation is in place.
    std::vector<double> block(m * d);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = member.oob[j];
      for (std::size_t f = 0; f < d; ++f) block[j * d + f] = x[f * n + i];
    }
    std::size_t correct = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (member.tree.predict(&block[j * d]) == y[member.oob[j]]) ++correct;
    }
    const double baseline =
        static_cast<double>(correct) / static_cast<double>(m);

    std::vector<double> saved(m);
    std::vector<std::uint32_t> perm(m);
    for (std::size_t f = 0; f < d; ++f) {
      // A feature the tree never tests cannot change any prediction.
      if (!((used[f >> 6] >> (f & 63)) & 1u)) continue;
      for (std::size_t j = 0; j < m; ++j) {
        saved[j] = block[j * d + f];
        perm[j] = static_cast<std::uint32_t>(j);
      }
      Rng perm_rng(mix_seed(mix_seed(seed, 0x52465045u + t), f));
      perm_rng.shuffle(perm);
      for (std::size_t j = 0; j < m; ++j) block[j * d + f] = saved[perm[j]];
      std::size_t hits = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (member.tree.predict(&block[j * d]) == y[member.oob[j]]) ++hits;
      }
      for (std::size_t j = 0; j < m; ++j) block[j * d + f] = saved[j];
      drops[t * d + f] =
          baseline - static_cast<double>(hits) / static_cast<double>(m);
    }
  });

  std::vector<double> scores(d, 0.0);
  for (std::size_t t = 0; t < tree_count; ++t) {
    for (std::size_t f = 0; f < d; ++f) scores[f] += drops[t * d + f];
  }
  for (std::size_t f = 0; f < d; ++f) {
    scores[f] /= static_cast<double>(tree_count);
    if (scores[f] < 0.0) scores[f] = 0.0;
  }
  return scores;
}

}  // namespace hpcd

#include <cmath>
#include <cstddef>
#include <vector>

#include "hpcd/error.hpp"
#include "hpcd/learners.hpp"
#include "hpcd/tree.hpp"
#include "learners_impl.hpp"

namespace hpcd::detail {

// SAMME boosting over depth-limited CART trees on raw counter values.
// Rounds whose weighted error reaches the random-guessing bound (K-1)/K are
// discarded and boosting stops there; a round with zero weighted error is
// kept with weight 1 and also stops the loop, because reweighting has
// nothing left to move.
void train_adaboost(const TrainContext& ctx, TrainedModel& model) {
  const std::size_t n = ctx.n;
  const std::size_t d = ctx.d;
  const int k = ctx.c;
  const TreeTrainer trainer(ctx.x_col.data(), ctx.y.data(), n, d, k);

  TreeGrowParams grow;
  grow.max_depth = ctx.hp.adaboost_tree_depth;
  grow.min_leaf = 1;
  grow.mtry = 0;
  grow.seed = 0;

  const double admission_limit =
      static_cast<double>(k - 1) / static_cast<double>(k);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<int> pred(n);
  std::vector<double> votes(n * static_cast<std::size_t>(k), 0.0);

  for (int t = 0; t < ctx.hp.adaboost_rounds; ++t) {
    Tree tree = trainer.train(weights, grow);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = tree.predict(ctx.x_row.data() + i * d);
      if (pred[i] != ctx.y[i]) eps += weights[i];
    }
    if (eps <= 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        votes[i * k + static_cast<std::size_t>(pred[i])] += 1.0;
      model.rounds.push_back({std::move(tree), 1.0, 0.0});
      break;
    }
    if (eps >= admission_limit) break;
    const double alpha = samme_alpha(eps, k);
    for (std::size_t i = 0; i < n; ++i)
      votes[i * k + static_cast<std::size_t>(pred[i])] += alpha;
    const double scale = std::exp(alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pred[i] != ctx.y[i]) weights[i] *= scale;
      total += weights[i];
    }
    for (double& w : weights) w /= total;
    model.rounds.push_back({std::move(tree), alpha, eps});
  }

  if (model.rounds.empty())
    throw Error(ErrorCode::ConvergenceFailure,
                "no boosting round beat random guessing; unable to build an "
                "ensemble");

  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = votes.data() + i * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;
    if (best != ctx.y[i]) ++errors;
  }
  model.converged = true;
  model.final_loss = static_cast<double>(errors) / static_cast<double>(n);
}

}  // namespace hpcd::detail

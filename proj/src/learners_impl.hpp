#ifndef HPCD_SRC_LEARNERS_IMPL_HPP_
#define HPCD_SRC_LEARNERS_IMPL_HPP_

#include <cstdint>
#include <vector>

#include "hpcd/learners.hpp"

namespace hpcd::detail {

// Shared between the per-algorithm translation units. x_row holds the
// training matrix row-major, already standardized for the algorithms that
// want it; x_col is the same matrix column-major and raw, filled only for
// Adaboost. y is remapped to 0..c-1 following model.class_set.
struct TrainContext {
  std::vector<double> x_row;
  std::vector<double> x_col;
  std::vector<int> y;
  std::size_t n = 0;
  std::size_t d = 0;
  int c = 0;
  Hyperparams hp;
  std::uint64_t seed = 0;
};

void train_lda(const TrainContext& ctx, TrainedModel& model);
void train_lr(const TrainContext& ctx, TrainedModel& model);
void train_svm(const TrainContext& ctx, TrainedModel& model);
void train_knn(const TrainContext& ctx, TrainedModel& model);
void train_adaboost(const TrainContext& ctx, TrainedModel& model);

}  // namespace hpcd::detail

#endif  // HPCD_SRC_LEARNERS_IMPL_HPP_

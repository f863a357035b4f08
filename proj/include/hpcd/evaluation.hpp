#ifndef HPCD_EVALUATION_HPP_
#define HPCD_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hpcd/dataset.hpp"
#include "hpcd/learners.hpp"

namespace hpcd {

/// Row index is the true class, column index the predicted class, both over
/// the full five-class label set regardless of which classes the data holds.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const;
  std::uint64_t diagonal() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  // Unweighted means over all five classes; classes absent from the data
  // contribute zeros, matching the usual macro-average convention.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// One-vs-rest operating curve. Points run from (0, 0) at threshold +inf to
/// (1, 1) at the lowest observed score, one point per distinct score; tied
/// scores move as a block. auc is the trapezoidal area, which for this
/// construction equals the Mann-Whitney U statistic scaled by 1/(P*N).
struct RocCurve {
  ClassLabel positive = ClassLabel::Benign;
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Predicts every labeled row; throws Error{SchemaMismatch} when the dataset
/// header differs from the model schema, Error{UnlabeledData} on a row
/// without a label.
ConfusionMatrix confusion(const TrainedModel& model, const Dataset& data);

/// Throws Error{EmptyMatrix} when the matrix holds no counts. Empty
/// precision/recall denominators yield 0, as does F1 when both are 0.
MetricsReport metrics(const ConfusionMatrix& cm);

/// Curve from raw scores; is_positive holds 0/1 per row. Throws
/// Error{ClassAbsent} unless both a positive and a negative row exist.
RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<int>& is_positive);

/// One-vs-rest curve for `positive` using the model's class probability as
/// the score. Throws Error{ClassAbsent} when the model never saw the class
/// or the data lacks either side.
RocCurve roc(const TrainedModel& model, const Dataset& data,
             ClassLabel positive);

struct CrossValidation {
  std::vector<MetricsReport> folds;
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;  // population stddev across folds
};

/// Shuffled (unstratified) k-fold; fold f trains with seed mix_seed(seed, f)
/// on the remaining folds. The summary accuracy is the unweighted mean of
/// the per-fold accuracies.
CrossValidation cross_validate(Algorithm algorithm, const Dataset& data,
                               int k, const Hyperparams& hyperparams,
                               std::uint64_t seed);

std::string render_confusion(const ConfusionMatrix& cm);
std::string render_metrics(const MetricsReport& report);
std::string render_roc(const RocCurve& curve);

}  // namespace hpcd

#endif  // HPCD_EVALUATION_HPP_

#include "hpcd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "hpcd/error.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/util.hpp"

namespace hpcd {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : counts)
    for (std::uint64_t v : row) sum += v;
  return sum;
}

std::uint64_t ConfusionMatrix::diagonal() const {
  std::uint64_t sum = 0;
  for (int i = 0; i < kNumClasses; ++i) sum += counts[i][i];
  return sum;
}

ConfusionMatrix confusion(const TrainedModel& model, const Dataset& data) {
  if (data.feature_names != model.feature_names)
    throw Error(ErrorCode::SchemaMismatch,
                "dataset header differs from the model's feature schema");
  ConfusionMatrix cm;
  std::vector<double> values;
  for (const Sample& row : data.rows) {
    if (!row.label)
      throw Error(ErrorCode::UnlabeledData,
                  "confusion matrix needs labels on every row");
    values.assign(row.values.begin(), row.values.end());
    const int t = static_cast<int>(*row.label);
    const int p = static_cast<int>(predict(model, values));
    ++cm.counts[t][p];
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0)
    throw Error(ErrorCode::EmptyMatrix, "confusion matrix holds no counts");
  MetricsReport out;
  out.accuracy =
      static_cast<double>(cm.diagonal()) / static_cast<double>(total);
  for (int j = 0; j < kNumClasses; ++j) {
    std::uint64_t col = 0;
    std::uint64_t row = 0;
    for (int i = 0; i < kNumClasses; ++i) {
      col += cm.counts[i][j];
      row += cm.counts[j][i];
    }
    const double tp = static_cast<double>(cm.counts[j][j]);
    const double p = col == 0 ? 0.0 : tp / static_cast<double>(col);
    const double r = row == 0 ? 0.0 : tp / static_cast<double>(row);
    out.precision[j] = p;
    out.recall[j] = r;
    out.f1[j] = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    out.macro_precision += p;
    out.macro_recall += r;
    out.macro_f1 += out.f1[j];
  }
  out.macro_precision /= kNumClasses;
  out.macro_recall /= kNumClasses;
  out.macro_f1 /= kNumClasses;
  return out;
}

RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<int>& is_positive) {
  if (scores.size() != is_positive.size())
    throw Error(ErrorCode::SchemaMismatch,
                "scores and positive flags differ in length");
  std::uint64_t pos = 0;
  for (int flag : is_positive) pos += flag != 0 ? 1 : 0;
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0)
    throw Error(ErrorCode::ClassAbsent,
                "operating curve needs both positive and negative rows");
  for (double s : scores)
    if (!std::isfinite(s))
      throw Error(ErrorCode::NonFiniteFeature, "non-finite score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // All rows sharing one score cross the threshold together.
    while (i < order.size() && scores[order[i]] == s) {
      if (is_positive[order[i]] != 0)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos),
                            s});
  }
  double auc = 0.0;
  for (std::size_t j = 1; j < curve.points.size(); ++j) {
    const RocPoint& a = curve.points[j - 1];
    const RocPoint& b = curve.points[j];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

RocCurve roc(const TrainedModel& model, const Dataset& data,
             ClassLabel positive) {
  if (data.feature_names != model.feature_names)
    throw Error(ErrorCode::SchemaMismatch,
                "dataset header differs from the model's feature schema");
  std::size_t index = model.class_set.size();
  for (std::size_t k = 0; k < model.class_set.size(); ++k)
    if (model.class_set[k] == positive) index = k;
  if (index == model.class_set.size())
    throw Error(ErrorCode::ClassAbsent,
                std::string("model was never trained on class ") +
                    std::string(class_name(positive)));
  std::vector<double> scores;
  std::vector<int> flags;
  scores.reserve(data.size());
  flags.reserve(data.size());
  std::vector<double> values;
  for (const Sample& row : data.rows) {
    if (!row.label)
      throw Error(ErrorCode::UnlabeledData,
                  "operating curve needs labels on every row");
    values.assign(row.values.begin(), row.values.end());
    scores.push_back(predict_proba(model, values)[index]);
    flags.push_back(*row.label == positive ? 1 : 0);
  }
  RocCurve curve = roc_from_scores(scores, flags);
  curve.positive = positive;
  return curve;
}

CrossValidation cross_validate(Algorithm algorithm, const Dataset& data,
                               int k, const Hyperparams& hyperparams,
                               std::uint64_t seed) {
  const std::vector<std::pair<Dataset, Dataset>> folds =
      kfold(data, k, seed);
  CrossValidation cv;
  double sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const TrainedModel model =
        train(algorithm, folds[f].first, hyperparams,
              mix_seed(seed, static_cast<std::uint64_t>(f)));
    cv.folds.push_back(metrics(confusion(model, folds[f].second)));
    sum += cv.folds.back().accuracy;
  }
  cv.mean_accuracy = sum / static_cast<double>(cv.folds.size());
  double var = 0.0;
  for (const MetricsReport& r : cv.folds) {
    const double d = r.accuracy - cv.mean_accuracy;
    var += d * d;
  }
  cv.stddev_accuracy = std::sqrt(var / static_cast<double>(cv.folds.size()));
  return cv;
}

std::string render_confusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "confusion-matrix rows=true cols=predicted\nclass";
  for (int j = 0; j < kNumClasses; ++j)
    out << ' ' << class_name(class_from_int(j));
  out << '\n';
  for (int i = 0; i < kNumClasses; ++i) {
    out << class_name(class_from_int(i));
    for (int j = 0; j < kNumClasses; ++j) out << ' ' << cm.counts[i][j];
    out << '\n';
  }
  return out.str();
}

std::string render_metrics(const MetricsReport& report) {
  std::ostringstream out;
  out << "accuracy " << format_double(report.accuracy) << '\n';
  out << "class precision recall f1\n";
  for (int j = 0; j < kNumClasses; ++j)
    out << class_name(class_from_int(j)) << ' '
        << format_double(report.precision[j]) << ' '
        << format_double(report.recall[j]) << ' '
        << format_double(report.f1[j]) << '\n';
  out << "macro " << format_double(report.macro_precision) << ' '
      << format_double(report.macro_recall) << ' '
      << format_double(report.macro_f1) << '\n';
  return out.str();
}

std::string render_roc(const RocCurve& curve) {
  std::ostringstream out;
  out << "roc positive=" << class_name(curve.positive)
      << " auc=" << format_double(curve.auc) << '\n';
  out << "threshold fpr tpr\n";
  for (const RocPoint& p : curve.points)
    out << format_double(p.threshold) << ' ' << format_double(p.fpr) << ' '
        << format_double(p.tpr) << '\n';
  return out.str();
}

}  // namespace hpcd

#ifndef HPCD_LEARNERS_HPP_
#define HPCD_LEARNERS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hpcd/dataset.hpp"
#include "hpcd/tree.hpp"

namespace hpcd {

enum class Algorithm {
  kLda,
  kLr,
  kKnn,
  kSvm,
  kAdaboost,
};

const char* algorithm_name(Algorithm algorithm);
Algorithm algorithm_from_name(const std::string& name);

struct Hyperparams {
  int adaboost_rounds = 200;
  int adaboost_tree_depth = 3;
  int epochs = 300;           // LR and SVM
  double learning_rate = 0.5; // LR and SVM initial step
  double l2 = 1e-4;           // LR and SVM penalty
  int knn_k = 5;

  bool operator==(const Hyperparams&) const = default;
};

struct BoostRound {
  Tree tree;
  double alpha = 0.0;
  double epsilon = 0.0;  // weighted error the round was admitted with
};

inline constexpr int kModelFormatVersion = 1;

/// One serializable container for all five algorithms. The active blocks
/// depend on `algorithm`: linear_w/linear_b for LDA, LR and SVM (class-major
/// weight rows over standardized inputs); knn_points/knn_labels for KNN
/// (standardized training set); rounds for Adaboost (raw-feature trees).
struct TrainedModel {
  Algorithm algorithm = Algorithm::kAdaboost;
  int format_version = kModelFormatVersion;
  std::vector<std::string> feature_names;
  std::optional<Standardizer> standardizer;
  std::vector<ClassLabel> class_set;  // ascending classes seen in training
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
  bool converged = true;   // false: epoch budget ran out before the plateau
  double final_loss = 0.0;

  std::vector<double> linear_w;  // class_set.size() x d, row-major
  std::vector<double> linear_b;
  std::vector<double> knn_points;  // n x d, row-major
  std::vector<int> knn_labels;     // indexes into class_set
  std::vector<BoostRound> rounds;

  std::size_t num_classes() const { return class_set.size(); }
};

/// Standardization is applied for LDA/LR/KNN/SVM and skipped for Adaboost
/// (axis-aligned splits are scale-invariant). Deterministic under
/// (algorithm, data, hyperparams, seed).
TrainedModel train(Algorithm algorithm, const Dataset& data,
                   const Hyperparams& hyperparams, std::uint64_t seed);

/// Probabilities over class_set order, non-negative, summing to 1.
std::vector<double> predict_proba(const TrainedModel& model,
                                  const std::vector<double>& values);

/// Argmax of predict_proba; ties resolve to the lowest class value, except
/// KNN where a vote tie goes to the class holding the nearer neighbor.
ClassLabel predict(const TrainedModel& model,
                   const std::vector<double>& values);

ClassLabel predict_sample(const TrainedModel& model, const Sample& sample);

void save_model(std::ostream& out, const TrainedModel& model);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
TrainedModel load_model(const std::string& path);

/// SAMME round weight ln((1-eps)/eps) + ln(K-1); requires 0 < eps < 1.
double samme_alpha(double epsilon, int num_classes);

/// Multinomial cross-entropy with L2 on the weights, exposed so tests can
/// pit the analytic gradient against finite differences. x is n x d
/// row-major, w is c x d row-major.
double lr_loss(const std::vector<double>& w, const std::vector<double>& b,
               const std::vector<double>& x, const std::vector<int>& y,
               std::size_t n, std::size_t d, int c, double l2);
void lr_gradient(const std::vector<double>& w, const std::vector<double>& b,
                 const std::vector<double>& x, const std::vector<int>& y,
                 std::size_t n, std::size_t d, int c, double l2,
                 std::vector<double>& grad_w, std::vector<double>& grad_b);

}  // namespace hpcd

#endif  // HPCD_LEARNERS_HPP_

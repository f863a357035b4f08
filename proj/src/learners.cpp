#include "hpcd/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hpcd/error.hpp"
#include "hpcd/util.hpp"
#include "learners_impl.hpp"

namespace hpcd {
namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptModel, what);
}

std::string read_token(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) corrupt("unexpected end of model data");
  return tok;
}

void expect_token(std::istream& in, const std::string& want) {
  const std::string got = read_token(in);
  if (got != want) corrupt("expected '" + want + "', found '" + got + "'");
}

long long read_int(std::istream& in, long long lo, long long hi,
                   const char* what) {
  const std::string tok = read_token(in);
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    corrupt(std::string("bad integer for ") + what + ": '" + tok + "'");
  if (value < lo || value > hi)
    corrupt(std::string(what) + " out of range: " + tok);
  return value;
}

std::uint64_t read_u64(std::istream& in, const char* what) {
  const std::string tok = read_token(in);
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    corrupt(std::string("bad integer for ") + what + ": '" + tok + "'");
  return value;
}

double read_double(std::istream& in, const char* what) {
  const double value = parse_double(read_token(in));
  if (!std::isfinite(value))
    corrupt(std::string("non-finite value for ") + what);
  return value;
}

void check_model_block(const TrainedModel& m) {
  const std::size_t d = m.feature_names.size();
  const std::size_t c = m.class_set.size();
  if (d == 0 || c == 0) corrupt("model has no features or no classes");
  switch (m.algorithm) {
    case Algorithm::kLda:
    case Algorithm::kLr:
    case Algorithm::kSvm:
      if (m.linear_w.size() != c * d || m.linear_b.size() != c)
        corrupt("linear block size mismatch");
      break;
    case Algorithm::kKnn:
      if (m.knn_labels.empty() ||
          m.knn_points.size() != m.knn_labels.size() * d)
        corrupt("nearest-neighbor block size mismatch");
      break;
    case Algorithm::kAdaboost:
      if (m.rounds.empty()) corrupt("boosted model holds no rounds");
      break;
  }
}

void check_input(const TrainedModel& m, const std::vector<double>& values) {
  if (values.size() != m.feature_names.size())
    throw Error(ErrorCode::SchemaMismatch,
                "model expects " + std::to_string(m.feature_names.size()) +
                    " features, got " + std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteFeature,
                  "prediction input contains a non-finite value");
  check_model_block(m);
}

std::vector<double> softmax(std::vector<double> scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return scores;
}

std::vector<double> linear_scores(const TrainedModel& m,
                                  const std::vector<double>& z) {
  const std::size_t d = m.feature_names.size();
  const std::size_t c = m.class_set.size();
  std::vector<double> scores(c);
  for (std::size_t k = 0; k < c; ++k) {
    const double* w = m.linear_w.data() + k * d;
    double acc = m.linear_b[k];
    for (std::size_t f = 0; f < d; ++f) acc += w[f] * z[f];
    scores[k] = acc;
  }
  return scores;
}

struct KnnVote {
  std::vector<double> proba;
  std::size_t winner = 0;
};

KnnVote knn_vote(const TrainedModel& m, const std::vector<double>& z) {
  const std::size_t d = m.feature_names.size();
  const std::size_t n = m.knn_labels.size();
  const std::size_t c = m.class_set.size();
  const std::size_t k =
      std::min<std::size_t>(std::max(m.hyperparams.knn_k, 1), n);
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = m.knn_points.data() + i * d;
    double dist = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      const double diff = z[f] - p[f];
      dist += diff * diff;
    }
    order[i] = {dist, i};
  }
  std::partial_sort(order.begin(), order.begin() + k, order.end());
  std::vector<double> votes(c, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    votes[static_cast<std::size_t>(m.knn_labels[order[j].second])] += 1.0;
  const double best = *std::max_element(votes.begin(), votes.end());
  // Vote ties go to whichever tied class owns the nearer neighbor.
  std::size_t winner = c;
  for (std::size_t j = 0; j < k && winner == c; ++j) {
    const auto cls = static_cast<std::size_t>(m.knn_labels[order[j].second]);
    if (votes[cls] == best) winner = cls;
  }
  for (double& v : votes) v /= static_cast<double>(k);
  return {std::move(votes), winner};
}

std::vector<double> boost_proba(const TrainedModel& m,
                                const std::vector<double>& z) {
  std::vector<double> score(m.class_set.size(), 0.0);
  double total = 0.0;
  for (const BoostRound& r : m.rounds) {
    const int p = r.tree.predict(z.data());
    if (p < 0 || static_cast<std::size_t>(p) >= score.size())
      corrupt("boosted tree votes for an out-of-range class");
    score[static_cast<std::size_t>(p)] += r.alpha;
    total += r.alpha;
  }
  for (double& s : score) s /= total;
  return score;
}

std::vector<double> proba_standardized(const TrainedModel& m,
                                       const std::vector<double>& z) {
  switch (m.algorithm) {
    case Algorithm::kLda:
    case Algorithm::kLr:
    case Algorithm::kSvm:
      return softmax(linear_scores(m, z));
    case Algorithm::kKnn:
      return knn_vote(m, z).proba;
    case Algorithm::kAdaboost:
      return boost_proba(m, z);
  }
  corrupt("unknown algorithm tag");
}

void validate_hyperparams(const Hyperparams& hp) {
  const bool ok = hp.adaboost_rounds >= 1 && hp.adaboost_tree_depth >= 1 &&
                  hp.epochs >= 1 && std::isfinite(hp.learning_rate) &&
                  hp.learning_rate > 0.0 && std::isfinite(hp.l2) &&
                  hp.l2 >= 0.0 && hp.knn_k >= 1;
  if (!ok)
    throw Error(ErrorCode::InvalidConfig,
                "hyperparameters out of range: rounds/depth/epochs/k must be "
                "positive, learning_rate > 0, l2 >= 0");
}

}  // namespace

const char* algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kLda: return "lda";
    case Algorithm::kLr: return "lr";
    case Algorithm::kKnn: return "knn";
    case Algorithm::kSvm: return "svm";
    case Algorithm::kAdaboost: return "adaboost";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "lda") return Algorithm::kLda;
  if (name == "lr") return Algorithm::kLr;
  if (name == "knn") return Algorithm::kKnn;
  if (name == "svm") return Algorithm::kSvm;
  if (name == "adaboost") return Algorithm::kAdaboost;
  throw Error(ErrorCode::InvalidConfig,
              "unknown algorithm '" + name +
                  "' (expected lda, lr, knn, svm or adaboost)");
}

TrainedModel train(Algorithm algorithm, const Dataset& data,
                   const Hyperparams& hyperparams, std::uint64_t seed) {
  validate_hyperparams(hyperparams);
  data.check_consistent();
  if (data.width() == 0)
    throw Error(ErrorCode::EmptyMatrix, "dataset has no feature columns");
  if (data.size() < 2)
    throw Error(ErrorCode::TooFewRows,
                "training needs at least two rows, got " +
                    std::to_string(data.size()));
  const std::vector<int> raw_y = data.labels();
  const std::set<int> present(raw_y.begin(), raw_y.end());
  if (present.size() < 2)
    throw Error(ErrorCode::SingleClass,
                "training data holds a single class; nothing to separate");

  TrainedModel model;
  model.algorithm = algorithm;
  model.hyperparams = hyperparams;
  model.seed = seed;
  model.feature_names = data.feature_names;
  std::map<int, int> remap;
  for (int v : present) {
    remap.emplace(v, static_cast<int>(model.class_set.size()));
    model.class_set.push_back(class_from_int(v));
  }

  detail::TrainContext ctx;
  ctx.n = data.size();
  ctx.d = data.width();
  ctx.c = static_cast<int>(model.class_set.size());
  ctx.hp = hyperparams;
  ctx.seed = seed;
  ctx.y.resize(ctx.n);
  for (std::size_t i = 0; i < ctx.n; ++i) ctx.y[i] = remap.at(raw_y[i]);

  if (algorithm == Algorithm::kAdaboost) {
    // Raw counter values; tree splits are invariant to monotone rescaling.
    ctx.x_row = data.feature_matrix();
    ctx.x_col.resize(ctx.n * ctx.d);
    for (std::size_t i = 0; i < ctx.n; ++i)
      for (std::size_t f = 0; f < ctx.d; ++f)
        ctx.x_col[f * ctx.n + i] = ctx.x_row[i * ctx.d + f];
    detail::train_adaboost(ctx, model);
    return model;
  }

  model.standardizer = fit_standardizer(data);
  ctx.x_row = apply_standardizer(*model.standardizer, data);
  switch (algorithm) {
    case Algorithm::kLda: detail::train_lda(ctx, model); break;
    case Algorithm::kLr: detail::train_lr(ctx, model); break;
    case Algorithm::kSvm: detail::train_svm(ctx, model); break;
    case Algorithm::kKnn: detail::train_knn(ctx, model); break;
    case Algorithm::kAdaboost: break;  // handled above
  }
  return model;
}

std::vector<double> predict_proba(const TrainedModel& model,
                                  const std::vector<double>& values) {
  check_input(model, values);
  std::vector<double> z = values;
  if (model.standardizer) model.standardizer->transform(z);
  return proba_standardized(model, z);
}

ClassLabel predict(const TrainedModel& model,
                   const std::vector<double>& values) {
  check_input(model, values);
  std::vector<double> z = values;
  if (model.standardizer) model.standardizer->transform(z);
  if (model.algorithm == Algorithm::kKnn)
    return model.class_set[knn_vote(model, z).winner];
  const std::vector<double> proba = proba_standardized(model, z);
  std::size_t best = 0;
  for (std::size_t k = 1; k < proba.size(); ++k)
    if (proba[k] > proba[best]) best = k;
  return model.class_set[best];
}

ClassLabel predict_sample(const TrainedModel& model, const Sample& sample) {
  std::vector<double> values(sample.values.begin(), sample.values.end());
  return predict(model, values);
}

double samme_alpha(double epsilon, int num_classes) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0) || num_classes < 2)
    throw Error(ErrorCode::InvalidConfig,
                "samme_alpha needs 0 < epsilon < 1 and at least two classes");
  return std::log((1.0 - epsilon) / epsilon) +
         std::log(static_cast<double>(num_classes - 1));
}

void save_model(std::ostream& out, const TrainedModel& model) {
  for (const auto& name : model.feature_names)
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
      throw Error(ErrorCode::InvalidConfig,
                  "feature names in model files must be non-empty and "
                  "whitespace-free: '" +
                      name + "'");
  check_model_block(model);
  const std::size_t d = model.feature_names.size();
  const std::size_t c = model.class_set.size();
  out << "hpcdetect-model " << kModelFormatVersion << "\n";
  out << "algorithm " << algorithm_name(model.algorithm) << "\n";
  out << "seed " << model.seed << "\n";
  out << "features " << d << "\n";
  for (const auto& name : model.feature_names) out << name << "\n";
  out << "classes " << c;
  for (ClassLabel cls : model.class_set) out << ' ' << static_cast<int>(cls);
  out << "\n";
  out << "standardizer " << (model.standardizer ? 1 : 0) << "\n";
  if (model.standardizer) {
    out << "means";
    for (double v : model.standardizer->means()) out << ' ' << format_double(v);
    out << "\nstddevs";
    for (double v : model.standardizer->stddevs())
      out << ' ' << format_double(v);
    out << "\n";
  }
  const Hyperparams& hp = model.hyperparams;
  out << "hyperparams " << hp.adaboost_rounds << ' ' << hp.adaboost_tree_depth
      << ' ' << hp.epochs << ' ' << format_double(hp.learning_rate) << ' '
      << format_double(hp.l2) << ' ' << hp.knn_k << "\n";
  out << "converged " << (model.converged ? 1 : 0) << "\n";
  out << "final_loss " << format_double(model.final_loss) << "\n";
  switch (model.algorithm) {
    case Algorithm::kLda:
    case Algorithm::kLr:
    case Algorithm::kSvm:
      out << "linear " << c << ' ' << d << "\n";
      for (std::size_t k = 0; k < c; ++k) {
        for (std::size_t f = 0; f < d; ++f)
          out << format_double(model.linear_w[k * d + f]) << ' ';
        out << format_double(model.linear_b[k]) << "\n";
      }
      break;
    case Algorithm::kKnn:
      out << "points " << model.knn_labels.size() << ' ' << d << "\n";
      for (std::size_t i = 0; i < model.knn_labels.size(); ++i) {
        out << model.knn_labels[i];
        for (std::size_t f = 0; f < d; ++f)
          out << ' ' << format_double(model.knn_points[i * d + f]);
        out << "\n";
      }
      break;
    case Algorithm::kAdaboost:
      out << "rounds " << model.rounds.size() << "\n";
      for (const BoostRound& r : model.rounds) {
        out << "round " << format_double(r.alpha) << ' '
            << format_double(r.epsilon) << "\n";
        r.tree.serialize(out);
      }
      break;
  }
  out << "end\n";
  if (!out) throw Error(ErrorCode::IoError, "model write failed");
}

void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
  save_model(out, model);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "model write failed: " + path);
}

TrainedModel load_model(std::istream& in) {
  expect_token(in, "hpcdetect-model");
  const long long version = read_int(in, 0, 1000000, "format version");
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::VersionMismatch,
                "model format version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  TrainedModel model;
  model.format_version = static_cast<int>(version);
  expect_token(in, "algorithm");
  const std::string algo = read_token(in);
  try {
    model.algorithm = algorithm_from_name(algo);
  } catch (const Error&) {
    corrupt("unknown algorithm '" + algo + "'");
  }
  expect_token(in, "seed");
  model.seed = read_u64(in, "seed");
  expect_token(in, "features");
  const auto d =
      static_cast<std::size_t>(read_int(in, 1, 1000000, "feature count"));
  model.feature_names.reserve(d);
  for (std::size_t f = 0; f < d; ++f)
    model.feature_names.push_back(read_token(in));
  expect_token(in, "classes");
  const auto c =
      static_cast<std::size_t>(read_int(in, 2, kNumClasses, "class count"));
  int prev = -1;
  for (std::size_t k = 0; k < c; ++k) {
    const int v =
        static_cast<int>(read_int(in, 0, kNumClasses - 1, "class value"));
    if (v <= prev) corrupt("class values must be strictly ascending");
    prev = v;
    model.class_set.push_back(class_from_int(v));
  }
  expect_token(in, "standardizer");
  const bool has_std = read_int(in, 0, 1, "standardizer flag") == 1;
  if (has_std) {
    expect_token(in, "means");
    std::vector<double> means(d), stddevs(d);
    for (std::size_t f = 0; f < d; ++f) means[f] = read_double(in, "mean");
    expect_token(in, "stddevs");
    for (std::size_t f = 0; f < d; ++f) {
      stddevs[f] = read_double(in, "stddev");
      if (stddevs[f] < 0.0) corrupt("negative stddev");
    }
    model.standardizer = Standardizer(std::move(means), std::move(stddevs));
  }
  expect_token(in, "hyperparams");
  model.hyperparams.adaboost_rounds =
      static_cast<int>(read_int(in, 1, 1000000, "rounds"));
  model.hyperparams.adaboost_tree_depth =
      static_cast<int>(read_int(in, 1, 64, "tree depth"));
  model.hyperparams.epochs =
      static_cast<int>(read_int(in, 1, 100000000, "epochs"));
  model.hyperparams.learning_rate = read_double(in, "learning rate");
  model.hyperparams.l2 = read_double(in, "l2");
  model.hyperparams.knn_k = static_cast<int>(read_int(in, 1, 1000000, "k"));
  try {
    validate_hyperparams(model.hyperparams);
  } catch (const Error&) {
    corrupt("hyperparameters out of range");
  }
  expect_token(in, "converged");
  model.converged = read_int(in, 0, 1, "converged flag") == 1;
  expect_token(in, "final_loss");
  model.final_loss = read_double(in, "final loss");
  switch (model.algorithm) {
    case Algorithm::kLda:
    case Algorithm::kLr:
    case Algorithm::kSvm: {
      expect_token(in, "linear");
      if (static_cast<std::size_t>(read_int(in, 1, 1000, "class rows")) != c ||
          static_cast<std::size_t>(read_int(in, 1, 1000000, "columns")) != d)
        corrupt("linear block shape disagrees with the header");
      model.linear_w.resize(c * d);
      model.linear_b.resize(c);
      for (std::size_t k = 0; k < c; ++k) {
        for (std::size_t f = 0; f < d; ++f)
          model.linear_w[k * d + f] = read_double(in, "weight");
        model.linear_b[k] = read_double(in, "bias");
      }
      break;
    }
    case Algorithm::kKnn: {
      expect_token(in, "points");
      const auto n =
          static_cast<std::size_t>(read_int(in, 1, 100000000, "point count"));
      if (static_cast<std::size_t>(read_int(in, 1, 1000000, "columns")) != d)
        corrupt("point block shape disagrees with the header");
      model.knn_labels.resize(n);
      model.knn_points.resize(n * d);
      for (std::size_t i = 0; i < n; ++i) {
        model.knn_labels[i] = static_cast<int>(
            read_int(in, 0, static_cast<long long>(c) - 1, "point label"));
        for (std::size_t f = 0; f < d; ++f)
          model.knn_points[i * d + f] = read_double(in, "point value");
      }
      break;
    }
    case Algorithm::kAdaboost: {
      expect_token(in, "rounds");
      const auto r =
          static_cast<std::size_t>(read_int(in, 1, 1000000, "round count"));
      model.rounds.reserve(r);
      for (std::size_t t = 0; t < r; ++t) {
        expect_token(in, "round");
        BoostRound round;
        round.alpha = read_double(in, "alpha");
        if (!(round.alpha > 0.0)) corrupt("round weight must be positive");
        round.epsilon = read_double(in, "epsilon");
        if (round.epsilon < 0.0 || round.epsilon >= 1.0)
          corrupt("round error must lie in [0, 1)");
        round.tree = Tree::deserialize(in);
        if (round.tree.max_feature() >= static_cast<int>(d))
          corrupt("tree tests a feature beyond the model schema");
        for (const TreeNode& node : round.tree.nodes()) {
          if (node.label < 0 || static_cast<std::size_t>(node.label) >= c)
            corrupt("tree labels an out-of-range class");
          if (!std::isfinite(node.threshold))
            corrupt("non-finite split threshold");
        }
        model.rounds.push_back(std::move(round));
      }
      break;
    }
  }
  expect_token(in, "end");
  check_model_block(model);
  return model;
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open for reading: " + path);
  return load_model(in);
}

}  // namespace hpcd

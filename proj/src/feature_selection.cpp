#include "hpcd/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hpcd/error.hpp"
#include "hpcd/events.hpp"
#include "hpcd/forest.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/util.hpp"

namespace hpcd {

const char* importance_method_name(ImportanceMethod method) {
  switch (method) {
    case ImportanceMethod::kRandomForest:
      return "random_forest";
    case ImportanceMethod::kPca:
      return "pca";
  }
  return "unknown";
}

namespace {

/// Descending score; exact ties go to the lower catalog_id, then the name.
std::vector<std::string> rank_names(const std::map<std::string, double>& scores) {
  std::vector<std::string> names;
  names.reserve(scores.size());
  for (const auto& [name, score] : scores) names.push_back(name);
  std::sort(names.begin(), names.end(),
            [&](const std::string& a, const std::string& b) {
              double sa = scores.at(a);
              double sb = scores.at(b);
              if (sa != sb) return sa > sb;
              int ia = catalog_id_or(a, 1 << 20);
              int ib = catalog_id_or(b, 1 << 20);
              if (ia != ib) return ia < ib;
              return a < b;
            });
  return names;
}

struct LabeledMatrix {
  std::vector<double> x;  // column-major
  std::vector<int> y;
  std::size_t n = 0;
  std::size_t d = 0;
};

LabeledMatrix column_major(const Dataset& dataset, bool need_labels) {
  dataset.check_consistent();
  LabeledMatrix m;
  m.n = dataset.rows.size();
  m.d = dataset.width();
  if (m.n == 0) {
    throw Error(ErrorCode::TooFewRows, "empty dataset");
  }
  m.x.resize(m.n * m.d);
  for (std::size_t i = 0; i < m.n; ++i) {
    const Sample& row = dataset.rows[i];
    for (std::size_t f = 0; f < m.d; ++f) {
      m.x[f * m.n + i] = static_cast<double>(row.values[f]);
    }
  }
  if (need_labels) {
    m.y = dataset.labels();
    bool multi = false;
    for (int label : m.y) {
      if (label != m.y.front()) {
        multi = true;
        break;
      }
    }
    if (!multi) {
      throw Error(ErrorCode::SingleClass,
                  "importance needs at least two classes");
    }
  }
  return m;
}

}  // namespace

ImportanceReport rf_importance(const Dataset& dataset, std::size_t trees,
                               std::uint64_t seed,
                               const RfImportanceOptions& options) {
  LabeledMatrix m = column_major(dataset, true);
  TreeTrainer trainer(m.x.data(), m.y.data(), m.n, m.d, kNumClasses);

  ForestParams params;
  params.trees = trees != 0 ? trees : options.trees;
  params.max_depth = options.max_depth;
  params.min_leaf = options.min_leaf;
  params.seed = mix_seed(seed, 1);
  params.threads = options.threads;
  Forest forest = train_forest(trainer, params);

  std::vector<double> scores = oob_permutation_importance(
      trainer, forest, mix_seed(seed, 2), options.threads);

  ImportanceReport report;
  report.method = ImportanceMethod::kRandomForest;
  for (std::size_t f = 0; f < m.d; ++f) {
    report.scores[dataset.feature_names[f]] = scores[f];
  }
  report.ranking = rank_names(report.scores);
  report.selected = select_features(report, std::min<std::size_t>(4, m.d));
  return report;
}

ImportanceReport pca_rank(const Dataset& dataset, std::size_t m_components) {
  LabeledMatrix m = column_major(dataset, false);
  if (m_components == 0 || m_components > m.d) {
    throw Error(ErrorCode::InvalidConfig,
                "component count must lie in [1, d]");
  }

  ImportanceReport report;
  report.method = ImportanceMethod::kPca;

  // z-score each column; constant columns stay at zero and degrade rank.
  Eigen::MatrixXd z(m.n, m.d);
  bool any_constant = false;
  for (std::size_t f = 0; f < m.d; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) mean += m.x[f * m.n + i];
    mean /= static_cast<double>(m.n);
    double var = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      double delta = m.x[f * m.n + i] - mean;
      var += delta * delta;
    }
    double stddev = std::sqrt(var / static_cast<double>(m.n));
    if (stddev <= Standardizer::kStddevFloor) {
      any_constant = true;
      for (std::size_t i = 0; i < m.n; ++i) {
        z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = 0.0;
      }
    } else {
      for (std::size_t i = 0; i < m.n; ++i) {
        z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
            (m.x[f * m.n + i] - mean) / stddev;
      }
    }
  }

  Eigen::MatrixXd cov =
      (z.transpose() * z) / static_cast<double>(m.n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EmptyMatrix, "eigendecomposition failed");
  }

  // Eigen reports ascending eigenvalues; walk them from the back.
  Eigen::VectorXd values = solver.eigenvalues();
  Eigen::MatrixXd vectors = solver.eigenvectors();
  double total = 0.0;
  for (Eigen::Index c = 0; c < values.size(); ++c) {
    total += std::max(values(c), 0.0);
  }
  if (total <= 0.0) {
    report.warnings.push_back(
        "DegenerateCovariance: no variance in any feature");
    total = 1.0;
  } else if (any_constant ||
             values(0) <= 1e-12 * std::max(values(values.size() - 1), 1.0)) {
    report.warnings.push_back(
        "DegenerateCovariance: rank-deficient correlation matrix");
  }

  report.explained_variance.reserve(m.d);
  for (Eigen::Index c = values.size() - 1; c >= 0; --c) {
    report.explained_variance.push_back(std::max(values(c), 0.0) / total);
  }

  for (std::size_t f = 0; f < m.d; ++f) {
    double score = 0.0;
    for (std::size_t c = 0; c < m_components; ++c) {
      Eigen::Index col = values.size() - 1 - static_cast<Eigen::Index>(c);
      score += std::abs(vectors(static_cast<Eigen::Index>(f), col)) *
               report.explained_variance[c];
    }
    report.scores[dataset.feature_names[f]] = score;
  }
  report.ranking = rank_names(report.scores);
  report.selected = select_features(report, std::min<std::size_t>(4, m.d));
  return report;
}

std::vector<std::string> select_features(const ImportanceReport& report,
                                         std::size_t m) {
  // Re-rank from the scores so the tie rule holds even for reports whose
  // ranking was assembled elsewhere; a report without scores falls back to
  // its ranking order.
  std::vector<std::string> ordered = report.scores.empty()
                                         ? report.ranking
                                         : rank_names(report.scores);
  if (ordered.empty()) {
    throw Error(ErrorCode::EmptyMatrix, "importance report has no features");
  }
  std::size_t take = std::min(m, ordered.size());
  ordered.resize(take);
  return ordered;
}

namespace {

DistributionSummary summarize(const std::string& scenario,
                              const std::string& feature,
                              std::vector<double> values) {
  DistributionSummary s;
  s.scenario = scenario;
  s.feature = feature;
  s.count = values.size();
  if (values.empty()) {
    s.histogram.assign(kHistogramBins, 0);
    return s;
  }
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    double pos = p * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.p25 = quantile(0.25);
  s.median = quantile(0.5);
  s.p75 = quantile(0.75);
  s.max = values.back();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  s.mean = mean;
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));

  s.histogram.assign(kHistogramBins, 0);
  double width = (s.max - s.min) / static_cast<double>(kHistogramBins);
  for (double v : values) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>((v - s.min) / width);
      if (bin >= kHistogramBins) bin = kHistogramBins - 1;
    }
    ++s.histogram[bin];
  }
  return s;
}

}  // namespace

std::vector<DistributionSummary> distribution_summary(
    const Dataset& dataset, const DatasetManifest& manifest) {
  dataset.check_consistent();
  if (manifest.feature_names != dataset.feature_names) {
    throw Error(ErrorCode::SchemaMismatch,
                "manifest features do not match the dataset");
  }
  std::size_t expected = 0;
  for (const auto& s : manifest.scenarios) expected += s.rows;
  if (expected != dataset.rows.size()) {
    throw Error(ErrorCode::SchemaMismatch,
                "manifest row counts do not cover the dataset");
  }

  std::vector<DistributionSummary> out;
  std::size_t offset = 0;
  for (const auto& scenario : manifest.scenarios) {
    for (std::size_t f = 0; f < dataset.width(); ++f) {
      std::vector<double> values;
      values.reserve(scenario.rows);
      for (std::size_t i = 0; i < scenario.rows; ++i) {
        values.push_back(
            static_cast<double>(dataset.rows[offset + i].values[f]));
      }
      out.push_back(summarize(scenario.name, dataset.feature_names[f],
                              std::move(values)));
    }
    offset += scenario.rows;
  }
  return out;
}

std::vector<DistributionSummary> distribution_summary_by_label(
    const Dataset& dataset) {
  dataset.check_consistent();
  std::vector<DistributionSummary> out;
  for (int label = 0; label < kNumClasses; ++label) {
    bool any = false;
    for (const auto& row : dataset.rows) {
      if (row.label && static_cast<int>(*row.label) == label) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    for (std::size_t f = 0; f < dataset.width(); ++f) {
      std::vector<double> values;
      for (const auto& row : dataset.rows) {
        if (row.label && static_cast<int>(*row.label) == label) {
          values.push_back(static_cast<double>(row.values[f]));
        }
      }
      out.push_back(
          summarize(std::string(class_name(static_cast<ClassLabel>(label))),
                    dataset.feature_names[f], std::move(values)));
    }
  }
  return out;
}

std::string render_importance_report(const ImportanceReport& report) {
  std::ostringstream out;
  out << "# importance-report\n";
  out << "method " << importance_method_name(report.method) << '\n';
  for (const auto& warning : report.warnings) {
    out << "warning " << warning << '\n';
  }
  if (!report.explained_variance.empty()) {
    out << "explained_variance_ratio";
    for (double r : report.explained_variance) out << ' ' << format_double(r);
    out << '\n';
  }
  out << "feature,score\n";
  for (const auto& name : report.ranking) {
    out << name << ',' << format_double(report.scores.at(name)) << '\n';
  }
  out << "selected";
  for (const auto& name : report.selected) out << ' ' << name;
  out << '\n';
  return out.str();
}

std::string render_distribution_report(
    const std::vector<DistributionSummary>& summaries) {
  std::ostringstream out;
  out << "# distribution-report\n";
  out << "scenario,feature,count,min,p25,median,p75,max,mean,stddev\n";
  for (const auto& s : summaries) {
    out << s.scenario << ',' << s.feature << ',' << s.count << ','
        << format_double(s.min) << ',' << format_double(s.p25) << ','
        << format_double(s.median) << ',' << format_double(s.p75) << ','
        << format_double(s.max) << ',' << format_double(s.mean) << ','
        << format_double(s.stddev) << '\n';
  }
  out << "# histograms (" << kHistogramBins << " bins over [min,max])\n";
  out << "scenario,feature,bin,count\n";
  for (const auto& s : summaries) {
    for (std::size_t b = 0; b < s.histogram.size(); ++b) {
      if (s.histogram[b] == 0) continue;
      out << s.scenario << ',' << s.feature << ',' << b << ','
          << s.histogram[b] << '\n';
    }
  }
  return out.str();
}

}  // namespace hpcd

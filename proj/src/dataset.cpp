#include "hpcd/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "hpcd/error.hpp"
#include "hpcd/rng.hpp"

namespace hpcd {

std::map<ClassLabel, std::size_t> Dataset::class_counts() const {
  std::map<ClassLabel, std::size_t> counts;
  for (const auto& row : rows) {
    if (row.label) ++counts[*row.label];
  }
  return counts;
}

void Dataset::check_consistent() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].values.size() != feature_names.size()) {
      throw Error(ErrorCode::InconsistentWidth,
                  "row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].values.size()) +
                      " values, header names " +
                      std::to_string(feature_names.size()));
    }
  }
}

Dataset Dataset::project(const std::vector<std::string>& names) const {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& name : names) {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
      throw Error(ErrorCode::MissingFeature, "feature not present: " + name);
    }
    cols.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  Dataset out;
  out.feature_names = names;
  out.rows.reserve(rows.size());
  for (const auto& row : rows) {
    Sample s;
    s.timestamp_ms = row.timestamp_ms;
    s.pid = row.pid;
    s.label = row.label;
    s.values.reserve(cols.size());
    for (std::size_t c : cols) s.values.push_back(row.values[c]);
    out.rows.push_back(std::move(s));
  }
  return out;
}

std::vector<double> Dataset::feature_matrix() const {
  std::vector<double> m;
  m.reserve(rows.size() * feature_names.size());
  for (const auto& row : rows) {
    for (std::uint64_t v : row.values) m.push_back(static_cast<double>(v));
  }
  return m;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.label) {
      throw Error(ErrorCode::UnlabeledData, "row without label");
    }
    out.push_back(static_cast<int>(*row.label));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset,
                                  const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "train_fraction must lie strictly between 0 and 1");
  }
  dataset.check_consistent();

  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;

  auto assign = [&](std::vector<std::size_t>& pool) {
    rng.shuffle(pool);
    const std::size_t n = pool.size();
    auto want = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(n)));
    // Both sides stay populated whenever the pool has at least two rows.
    if (n >= 2) want = std::clamp<std::size_t>(want, 1, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      (i < want ? train_idx : test_idx).push_back(pool[i]);
    }
  };

  if (spec.stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
      if (!dataset.rows[i].label) {
        throw Error(ErrorCode::UnlabeledData,
                    "stratified split requires labeled rows");
      }
      by_class[static_cast<int>(*dataset.rows[i].label)].push_back(i);
    }
    for (auto& [cls, pool] : by_class) assign(pool);
  } else {
    std::vector<std::size_t> pool(dataset.rows.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    assign(pool);
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<std::size_t>& idx) {
    Dataset out;
    out.feature_names = dataset.feature_names;
    out.rows.reserve(idx.size());
    for (std::size_t i : idx) out.rows.push_back(dataset.rows[i]);
    return out;
  };
  return {take(train_idx), take(test_idx)};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::InvalidConfig,
                "fold count must satisfy 2 <= k <= n");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[f].begin(), folds[f].end());
    pos += len;
  }
  return folds;
}

std::vector<std::pair<Dataset, Dataset>> kfold(const Dataset& dataset, int k,
                                               std::uint64_t seed) {
  dataset.check_consistent();
  auto folds = kfold_indices(dataset.rows.size(), k, seed);
  std::vector<std::pair<Dataset, Dataset>> out;
  out.reserve(folds.size());
  for (const auto& holdout : folds) {
    std::vector<char> held(dataset.rows.size(), 0);
    for (std::size_t i : holdout) held[i] = 1;
    Dataset train;
    Dataset test;
    train.feature_names = dataset.feature_names;
    test.feature_names = dataset.feature_names;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
      (held[i] ? test : train).rows.push_back(dataset.rows[i]);
    }
    out.emplace_back(std::move(train), std::move(test));
  }
  return out;
}

Standardizer::Standardizer(std::vector<double> means,
                           std::vector<double> stddevs)
    : means_(std::move(means)), stddevs_(std::move(stddevs)) {
  if (means_.size() != stddevs_.size()) {
    throw Error(ErrorCode::InvalidConfig,
                "standardizer mean/stddev width mismatch");
  }
}

void Standardizer::transform(std::vector<double>& values) const {
  if (values.size() != means_.size()) {
    throw Error(ErrorCode::InconsistentWidth,
                "standardizer width " + std::to_string(means_.size()) +
                    ", row width " + std::to_string(values.size()));
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (stddevs_[j] <= kStddevFloor) {
      values[j] = 0.0;
    } else {
      values[j] = (values[j] - means_[j]) / stddevs_[j];
    }
  }
}

std::vector<double> Standardizer::transformed(
    const std::vector<double>& values) const {
  std::vector<double> out = values;
  transform(out);
  return out;
}

Standardizer fit_standardizer(const Dataset& train) {
  if (train.rows.empty()) {
    throw Error(ErrorCode::TooFewRows, "cannot standardize an empty dataset");
  }
  train.check_consistent();
  const std::size_t d = train.width();
  const auto n = static_cast<double>(train.rows.size());

  std::vector<double> means(d, 0.0);
  for (const auto& row : train.rows) {
    for (std::size_t j = 0; j < d; ++j) {
      means[j] += static_cast<double>(row.values[j]);
    }
  }
  for (double& m : means) m /= n;

  std::vector<double> vars(d, 0.0);
  for (const auto& row : train.rows) {
    for (std::size_t j = 0; j < d; ++j) {
      double delta = static_cast<double>(row.values[j]) - means[j];
      vars[j] += delta * delta;
    }
  }
  std::vector<double> stddevs(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    stddevs[j] = std::sqrt(vars[j] / n);
  }
  return Standardizer(std::move(means), std::move(stddevs));
}

std::vector<double> apply_standardizer(const Standardizer& standardizer,
                                       const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.rows.size() * dataset.width());
  std::vector<double> row_buf(dataset.width());
  for (const auto& row : dataset.rows) {
    for (std::size_t j = 0; j < row_buf.size(); ++j) {
      row_buf[j] = static_cast<double>(row.values[j]);
    }
    standardizer.transform(row_buf);
    out.insert(out.end(), row_buf.begin(), row_buf.end());
  }
  return out;
}

}  // namespace hpcd

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "hpcd/error.hpp"
#include "hpcd/learners.hpp"
#include "learners_impl.hpp"

namespace hpcd {

double lr_loss(const std::vector<double>& w, const std::vector<double>& b,
               const std::vector<double>& x, const std::vector<int>& y,
               std::size_t n, std::size_t d, int c, double l2) {
  const auto cc = static_cast<std::size_t>(c);
  std::vector<double> logits(cc);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * d;
    double mx = -1e300;
    for (std::size_t k = 0; k < cc; ++k) {
      double acc = b[k];
      const double* wk = w.data() + k * d;
      for (std::size_t f = 0; f < d; ++f) acc += wk[f] * row[f];
      logits[k] = acc;
      mx = std::max(mx, acc);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < cc; ++k) denom += std::exp(logits[k] - mx);
    loss -= logits[static_cast<std::size_t>(y[i])] - mx - std::log(denom);
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + 0.5 * l2 * reg;
}

void lr_gradient(const std::vector<double>& w, const std::vector<double>& b,
                 const std::vector<double>& x, const std::vector<int>& y,
                 std::size_t n, std::size_t d, int c, double l2,
                 std::vector<double>& grad_w, std::vector<double>& grad_b) {
  const auto cc = static_cast<std::size_t>(c);
  grad_w.assign(cc * d, 0.0);
  grad_b.assign(cc, 0.0);
  std::vector<double> p(cc);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * d;
    double mx = -1e300;
    for (std::size_t k = 0; k < cc; ++k) {
      double acc = b[k];
      const double* wk = w.data() + k * d;
      for (std::size_t f = 0; f < d; ++f) acc += wk[f] * row[f];
      p[k] = acc;
      mx = std::max(mx, acc);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < cc; ++k) {
      p[k] = std::exp(p[k] - mx);
      denom += p[k];
    }
    for (std::size_t k = 0; k < cc; ++k) {
      const double resid =
          p[k] / denom - (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0);
      grad_b[k] += resid;
      double* gk = grad_w.data() + k * d;
      for (std::size_t f = 0; f < d; ++f) gk[f] += resid * row[f];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < cc; ++k) {
    grad_b[k] *= inv_n;
    double* gk = grad_w.data() + k * d;
    const double* wk = w.data() + k * d;
    for (std::size_t f = 0; f < d; ++f) gk[f] = gk[f] * inv_n + l2 * wk[f];
  }
}

namespace detail {

void train_lda(const TrainContext& ctx, TrainedModel& model) {
  const std::size_t n = ctx.n;
  const std::size_t d = ctx.d;
  const auto c = static_cast<std::size_t>(ctx.c);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(ctx.x_row.data(), static_cast<Eigen::Index>(n),
        static_cast<Eigen::Index>(d));

  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c),
                                             static_cast<Eigen::Index>(d));
  std::vector<double> counts(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mu.row(ctx.y[i]) += x.row(static_cast<Eigen::Index>(i));
    counts[static_cast<std::size_t>(ctx.y[i])] += 1.0;
  }
  for (std::size_t k = 0; k < c; ++k)
    mu.row(static_cast<Eigen::Index>(k)) /= counts[k];

  // Pooled within-class covariance (maximum-likelihood scaling), plus a
  // relative ridge so the solve stays well posed even for collinear columns.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                                static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::RowVectorXd r =
        x.row(static_cast<Eigen::Index>(i)) - mu.row(ctx.y[i]);
    sigma.noalias() += r.transpose() * r;
  }
  sigma /= static_cast<double>(n);
  const double ridge =
      std::max(1e-6 * sigma.trace() / static_cast<double>(d), 1e-12);
  sigma.diagonal().array() += ridge;

  const Eigen::LDLT<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure,
                "within-class covariance factorization failed");
  const Eigen::MatrixXd w = solver.solve(mu.transpose());  // d x c

  model.linear_w.resize(c * d);
  model.linear_b.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const Eigen::VectorXd wk = w.col(static_cast<Eigen::Index>(k));
    for (std::size_t f = 0; f < d; ++f)
      model.linear_w[k * d + f] = wk(static_cast<Eigen::Index>(f));
    const double quad = mu.row(static_cast<Eigen::Index>(k)).dot(wk);
    model.linear_b[k] =
        -0.5 * quad + std::log(counts[k] / static_cast<double>(n));
  }
  model.converged = true;
  model.final_loss = 0.0;
}

void train_lr(const TrainContext& ctx, TrainedModel& model) {
  const std::size_t d = ctx.d;
  const auto c = static_cast<std::size_t>(ctx.c);
  model.linear_w.assign(c * d, 0.0);
  model.linear_b.assign(c, 0.0);

  constexpr double kGradTol = 1e-5;  // max-abs gradient entry at the plateau
  std::vector<double> gw, gb;
  bool converged = false;
  for (int epoch = 0; epoch < ctx.hp.epochs; ++epoch) {
    lr_gradient(model.linear_w, model.linear_b, ctx.x_row, ctx.y, ctx.n, d,
                ctx.c, ctx.hp.l2, gw, gb);
    double gmax = 0.0;
    for (double g : gw) gmax = std::max(gmax, std::abs(g));
    for (double g : gb) gmax = std::max(gmax, std::abs(g));
    if (gmax <= kGradTol) {
      converged = true;
      break;
    }
    const double eta = ctx.hp.learning_rate / (1.0 + 0.01 * epoch);
    for (std::size_t j = 0; j < gw.size(); ++j) model.linear_w[j] -= eta * gw[j];
    for (std::size_t j = 0; j < gb.size(); ++j) model.linear_b[j] -= eta * gb[j];
  }
  if (!converged) {
    lr_gradient(model.linear_w, model.linear_b, ctx.x_row, ctx.y, ctx.n, d,
                ctx.c, ctx.hp.l2, gw, gb);
    double gmax = 0.0;
    for (double g : gw) gmax = std::max(gmax, std::abs(g));
    for (double g : gb) gmax = std::max(gmax, std::abs(g));
    converged = gmax <= kGradTol;
  }
  model.converged = converged;
  model.final_loss = lr_loss(model.linear_w, model.linear_b, ctx.x_row, ctx.y,
                             ctx.n, d, ctx.c, ctx.hp.l2);
}

void train_svm(const TrainContext& ctx, TrainedModel& model) {
  const std::size_t n = ctx.n;
  const std::size_t d = ctx.d;
  const auto c = static_cast<std::size_t>(ctx.c);
  model.linear_w.assign(c * d, 0.0);
  model.linear_b.assign(c, 0.0);

  // One-vs-rest hinge loss, full-batch subgradient steps per class.
  double total_loss = 0.0;
  bool all_converged = true;
  std::vector<double> gw(d);
  for (std::size_t k = 0; k < c; ++k) {
    double* w = model.linear_w.data() + k * d;
    double& b = model.linear_b[k];
    double prev_loss = -1.0;
    double loss = 0.0;
    bool converged = false;
    for (int epoch = 0; epoch < ctx.hp.epochs; ++epoch) {
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = ctx.x_row.data() + i * d;
        const double s =
            static_cast<std::size_t>(ctx.y[i]) == k ? 1.0 : -1.0;
        double margin = b;
        for (std::size_t f = 0; f < d; ++f) margin += w[f] * row[f];
        margin *= s;
        if (margin < 1.0) {
          loss += 1.0 - margin;
          for (std::size_t f = 0; f < d; ++f) gw[f] -= s * row[f];
          gb -= s;
        }
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      loss *= inv_n;
      double reg = 0.0;
      for (std::size_t f = 0; f < d; ++f) reg += w[f] * w[f];
      loss += 0.5 * ctx.hp.l2 * reg;
      if (prev_loss >= 0.0 &&
          std::abs(loss - prev_loss) <= 1e-9 * (1.0 + std::abs(loss))) {
        converged = true;
        break;
      }
      prev_loss = loss;
      const double eta = ctx.hp.learning_rate / (1.0 + 0.01 * epoch);
      for (std::size_t f = 0; f < d; ++f)
        w[f] -= eta * (gw[f] * inv_n + ctx.hp.l2 * w[f]);
      b -= eta * gb * inv_n;
    }
    total_loss += loss;
    all_converged = all_converged && converged;
  }
  model.converged = all_converged;
  model.final_loss = total_loss / static_cast<double>(c);
}

void train_knn(const TrainContext& ctx, TrainedModel& model) {
  model.knn_points = ctx.x_row;
  model.knn_labels = ctx.y;
  model.converged = true;
  model.final_loss = 0.0;
}

}  // namespace detail
}  // namespace hpcd

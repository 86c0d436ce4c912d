#include "metalr/em.hpp"

#include "metalr/linalg.hpp"
#include "metalr/parallel.hpp"
#include "metalr/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace metalr {

namespace {

constexpr double kVarianceFloor = 1e-10;

Index packed_size(Index d) { return d * (d + 1) / 2; }

Vector pack_upper(const Matrix& G) {
  Vector out(packed_size(G.cols()));
  Index pos = 0;
  for (Index j = 0; j < G.cols(); ++j)
    for (Index i = 0; i <= j; ++i) out(pos++) = G(i, j);
  return out;
}

Matrix unpack_upper(const Vector& packed, Index d) {
  Matrix G(d, d);
  Index pos = 0;
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i <= j; ++i) {
      G(i, j) = packed(pos);
      G(j, i) = packed(pos++);
    }
  return G;
}

// n x k residual sums of squares of every task under every component.
Matrix residual_sums(const std::vector<TaskBatch>& tasks, const Matrix& W, unsigned threads) {
  Matrix rss(static_cast<Index>(tasks.size()), W.cols());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Matrix r = (-(tasks[i].X * W)).colwise() + tasks[i].y;
    rss.row(static_cast<Index>(i)) = r.colwise().squaredNorm();
  });
  return rss;
}

// Log of p_l N(y_i; X_i w_l, s2_l I) for every task and component.
Matrix component_log_densities(const std::vector<TaskBatch>& tasks, const Matrix& rss, const FittedModel& model) {
  const Index n = rss.rows();
  const Index k = rss.cols();
  Matrix logits(n, k);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(tasks[static_cast<std::size_t>(i)].size());
    for (Index l = 0; l < k; ++l)
      logits(i, l) = std::log(model.p_hat(l)) - 0.5 * t * (std::log(model.s2_hat(l)) + log_two_pi) -
                     rss(i, l) / (2.0 * model.s2_hat(l));
  }
  return logits;
}

// Row-wise log-sum-exp; writes the normalized responsibilities into `resp`.
Vector normalize_rows(const Matrix& logits, Matrix& resp) {
  Vector lse(logits.rows());
  resp.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    if (!std::isfinite(top)) throw NumericalError("EM likelihood is not finite");
    const auto shifted = (logits.row(i).array() - top).exp();
    const double sum = shifted.sum();
    lse(i) = top + std::log(sum);
    resp.row(i) = shifted / sum;
  }
  return lse;
}

void check_model(const FittedModel& model, Index d) {
  require(model.W_hat.rows() == d, "EM model dimension differs from task dimension");
  require(model.s2_hat.size() == model.components() && model.p_hat.size() == model.components(),
          "EM model shape mismatch");
  require((model.s2_hat.array() > 0.0).all(), "EM needs positive initial noise variances");
  require((model.p_hat.array() >= 0.0).all() && std::abs(model.p_hat.sum() - 1.0) <= 1e-9,
          "EM mixing weights must lie on the simplex");
}

}  // namespace

FittedModel em_init_perturbed(const MetaParams& truth, double gamma2, std::uint64_t seed, bool deterministic) {
  require(gamma2 >= 0.0, "perturbation variance must be non-negative");
  const Index d = truth.dim();
  const Index k = truth.components();
  RandomStream rng(seed, {StreamTag::EmInit, 0});

  FittedModel init;
  init.W_hat = truth.W;
  const double gamma = std::sqrt(gamma2);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < d; ++i) init.W_hat(i, j) += gamma * rng.normal();
    const double norm = init.W_hat.col(j).norm();
    if (norm > 1.0) init.W_hat.col(j) /= norm;
  }

  Vector s = truth.s;
  Vector p = truth.p;
  if (!deterministic) {
    const double s_sd = std::sqrt(0.1);
    for (Index j = 0; j < k; ++j) s(j) = std::abs(s(j) + s_sd * rng.normal());
    const double p_sd = std::sqrt(1.0 / static_cast<double>(k));
    for (Index j = 0; j < k; ++j) p(j) = std::abs(p(j) + p_sd * rng.normal());
    p /= p.sum();
  }
  init.s2_hat = s.array().square().max(kVarianceFloor);
  init.p_hat = p;
  init.degenerate.assign(static_cast<std::size_t>(k), false);
  return init;
}

double mixture_log_likelihood(const std::vector<TaskBatch>& tasks, const FittedModel& model, unsigned threads) {
  require(!tasks.empty(), "log-likelihood of an empty task set");
  const Matrix rss = residual_sums(tasks, model.W_hat, threads);
  Matrix resp;
  return normalize_rows(component_log_densities(tasks, rss, model), resp).mean();
}

EmResult em_fit(const std::vector<TaskBatch>& tasks, const FittedModel& init, const EmOptions& options) {
  require(!tasks.empty(), "EM needs at least one task");
  require(options.max_iters >= 0 && options.tol > 0.0, "EM needs max_iters >= 0 and tol > 0");
  const Index n = static_cast<Index>(tasks.size());
  const Index d = tasks.front().dim();
  for (const auto& task : tasks) {
    validate_task(task);
    require(task.dim() == d, "EM tasks disagree on dimension");
  }
  check_model(init, d);
  const Index k = init.components();

  // Sufficient statistics per task.
  // One column per task, so that a task's statistics are contiguous.
  Matrix grams(packed_size(d), n);
  Matrix moments(d, n);
  Vector counts(n);
  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    Matrix G = Matrix::Zero(d, d);
    G.selfadjointView<Eigen::Upper>().rankUpdate(task.X.transpose());
    grams.col(static_cast<Index>(i)) = pack_upper(G);
    moments.col(static_cast<Index>(i)) = task.X.transpose() * task.y;
    counts(static_cast<Index>(i)) = static_cast<double>(task.size());
  });

  EmResult result;
  result.model = init;
  result.model.degenerate.assign(static_cast<std::size_t>(k), false);
  result.model.p_valid = true;
  FittedModel& model = result.model;

  Matrix rss = residual_sums(tasks, model.W_hat, options.threads);
  for (int iter = 0;; ++iter) {
    const Vector lse = normalize_rows(component_log_densities(tasks, rss, model), result.responsibilities);
    const double mean_ll = lse.mean();
    if (options.observer) options.observer(iter, model, mean_ll);
    result.trace.push_back(mean_ll);
    const std::size_t steps = result.trace.size();
    if (steps >= 2 && result.trace[steps - 1] - result.trace[steps - 2] < options.tol) {
      result.converged = !result.collapsed;
      break;
    }
    if (iter == options.max_iters) break;

    const Matrix& resp = result.responsibilities;
    const Vector task_weight = resp.colwise().sum().transpose();
    const Vector example_weight = resp.transpose() * counts;
    const Matrix weighted_grams = grams * resp;     // packed x k
    const Matrix weighted_moments = moments * resp;  // d x k
    std::vector<bool> updated(static_cast<std::size_t>(k), false);
    for (Index l = 0; l < k; ++l) {
      if (example_weight(l) < static_cast<double>(d)) {
        model.degenerate[static_cast<std::size_t>(l)] = true;
        result.collapsed = true;
        continue;
      }
      const Matrix G = unpack_upper(weighted_grams.col(l), d);
      model.W_hat.col(l) = least_squares_gram(G, weighted_moments.col(l));
      updated[static_cast<std::size_t>(l)] = true;
    }
    model.p_hat = task_weight / static_cast<double>(n);
    rss = residual_sums(tasks, model.W_hat, options.threads);
    const Vector weighted_rss = (resp.array() * rss.array()).colwise().sum().transpose();
    for (Index l = 0; l < k; ++l)
      if (updated[static_cast<std::size_t>(l)])
        model.s2_hat(l) = std::max(kVarianceFloor, weighted_rss(l) / example_weight(l));
    result.iterations = iter + 1;
  }
  return result;
}

}  // namespace metalr

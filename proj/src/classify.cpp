#include "metalr/classify.hpp"

#include "metalr/linalg.hpp"
#include "metalr/parallel.hpp"

#include <cmath>

namespace metalr {

Vector classification_objectives(const TaskBatch& task, const ClusterModel& model) {
  validate_task(task);
  require(task.dim() == model.w_tilde.rows(), "task and model dimensions differ");
  require(model.r2_tilde.size() == model.w_tilde.cols(), "cluster model shape mismatch");
  require((model.r2_tilde.array() > 0.0).all(), "cluster residual scales must be positive");

  const Matrix residuals = (-(task.X * model.w_tilde)).colwise() + task.y;  // t x k
  const double t = static_cast<double>(task.size());
  Vector out(model.w_tilde.cols());
  for (Index l = 0; l < out.size(); ++l)
    out(l) = residuals.col(l).squaredNorm() / (2.0 * model.r2_tilde(l)) + 0.5 * t * std::log(model.r2_tilde(l));
  return out;
}

int classify_task(const TaskBatch& task, const ClusterModel& model) {
  const Vector objective = classification_objectives(task, model);
  Index best = 0;
  for (Index l = 1; l < objective.size(); ++l)
    if (objective(l) < objective(best)) best = l;
  return static_cast<int>(best);
}

RefineResult refine(const std::vector<TaskBatch>& heavy, const std::vector<TaskBatch>& light2,
                    const ClusterModel& model, Index d, unsigned threads) {
  const Index k = model.components();
  require(model.assignments.labels.size() == heavy.size(), "cluster assignments do not cover the heavy tasks");
  require(model.w_tilde.rows() == d, "model dimension differs from d");

  RefineResult out;
  out.light_assignments.resize(light2.size());
  parallel_for(light2.size(), threads,
               [&](std::size_t i) { out.light_assignments[i] = classify_task(light2[i], model); });

  std::vector<std::vector<const TaskBatch*>> pools(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < heavy.size(); ++i)
    pools[static_cast<std::size_t>(model.assignments.labels[i])].push_back(&heavy[i]);
  for (std::size_t i = 0; i < light2.size(); ++i)
    pools[static_cast<std::size_t>(out.light_assignments[i])].push_back(&light2[i]);

  FittedModel& fit = out.model;
  fit.W_hat.resize(d, k);
  fit.s2_hat.resize(k);
  fit.degenerate.assign(static_cast<std::size_t>(k), false);
  out.examples.assign(static_cast<std::size_t>(k), 0);

  parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t c) {
    Matrix G = Matrix::Zero(d, d);
    Vector b = Vector::Zero(d);
    Index m = 0;
    for (const TaskBatch* task : pools[c]) {
      require(task->dim() == d, "task dimension differs from d");
      G.selfadjointView<Eigen::Lower>().rankUpdate(task->X.transpose());
      b.noalias() += task->X.transpose() * task->y;
      m += task->size();
    }
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    const Vector w = m > 0 ? least_squares_gram(G, b) : Vector::Zero(d);
    double rss = 0.0;
    for (const TaskBatch* task : pools[c]) rss += (task->y - task->X * w).squaredNorm();

    const auto col = static_cast<Index>(c);
    fit.W_hat.col(col) = w;
    out.examples[c] = m;
    if (m > d) {
      fit.s2_hat(col) = rss / static_cast<double>(m - d);
    } else {
      fit.s2_hat(col) = m > 0 ? rss / static_cast<double>(m) : 0.0;
      fit.degenerate[c] = true;
    }
  });

  fit.p_hat = Vector::Zero(k);
  if (light2.empty()) {
    fit.p_valid = false;
    fit.p_hat.setConstant(std::nan(""));
  } else {
    for (int label : out.light_assignments) fit.p_hat(label) += 1.0;
    fit.p_hat /= static_cast<double>(light2.size());
  }
  return out;
}

}  // namespace metalr

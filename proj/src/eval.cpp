#include "metalr/eval.hpp"

#include "metalr/datagen.hpp"
#include "metalr/parallel.hpp"
#include "metalr/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metalr {

double subspace_error(const Subspace& U, const MetaParams& meta) {
  require(U.dim() == meta.dim(), "subspace and meta-parameter dimensions differ");
  double worst = 0.0;
  for (Index i = 0; i < meta.components(); ++i) {
    const Vector w = meta.W.col(i);
    worst = std::max(worst, (U.basis() * (U.basis().transpose() * w) - w).norm());
  }
  return worst / meta.scale();
}

std::vector<int> hungarian(const Matrix& cost) {
  require(cost.rows() == cost.cols(), "assignment needs a square cost matrix");
  const Index n = cost.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Potentials formulation with 1-based sentinel column 0.
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> owner(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index row = 1; row <= n; ++row) {
    owner[0] = row;
    Index col0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), kInf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(col0)] = true;
      const Index r = owner[static_cast<std::size_t>(col0)];
      double delta = kInf;
      Index col1 = 0;
      for (Index c = 1; c <= n; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (used[uc]) continue;
        const double reduced = cost(r - 1, c - 1) - u[static_cast<std::size_t>(r)] - v[uc];
        if (reduced < minv[uc]) {
          minv[uc] = reduced;
          way[uc] = col0;
        }
        if (minv[uc] < delta) {
          delta = minv[uc];
          col1 = c;
        }
      }
      for (Index c = 0; c <= n; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (used[uc]) {
          u[static_cast<std::size_t>(owner[uc])] += delta;
          v[uc] -= delta;
        } else {
          minv[uc] -= delta;
        }
      }
      col0 = col1;
    } while (owner[static_cast<std::size_t>(col0)] != 0);
    do {
      const Index col1 = way[static_cast<std::size_t>(col0)];
      owner[static_cast<std::size_t>(col0)] = owner[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (Index c = 1; c <= n; ++c)
    assignment[static_cast<std::size_t>(owner[static_cast<std::size_t>(c)] - 1)] = static_cast<int>(c - 1);
  return assignment;
}

std::vector<int> match_components(const FittedModel& est, const MetaParams& truth) {
  require(est.components() == truth.components() && est.dim() == truth.dim(),
          "estimate and truth disagree on k or d");
  const Index k = truth.components();
  Matrix cost(k, k);
  for (Index l = 0; l < k; ++l)
    for (Index i = 0; i < k; ++i) cost(l, i) = (est.W_hat.col(i) - truth.W.col(l)).norm();
  return hungarian(cost);
}

double estimation_error(const FittedModel& est, const MetaParams& truth, Index t_l2, const std::vector<int>& match) {
  require(t_l2 >= 1, "t_L2 must be positive");
  require(static_cast<Index>(match.size()) == truth.components(), "matching size differs from k");
  const double d = static_cast<double>(truth.dim());
  double eps = 0.0;
  for (Index l = 0; l < truth.components(); ++l) {
    const Index i = match[static_cast<std::size_t>(l)];
    const double s2 = truth.s(l) * truth.s(l);
    eps = std::max(eps, (est.W_hat.col(i) - truth.W.col(l)).norm() / truth.s(l));
    eps = std::max(eps, std::sqrt(d) * std::abs(est.s2_hat(i) - s2) / s2);
    eps = std::max(eps, std::sqrt(d / static_cast<double>(t_l2)) * std::abs(est.p_hat(i) - truth.p(l)) / truth.p(l));
  }
  return eps;
}

double estimation_error(const FittedModel& est, const MetaParams& truth, Index t_l2) {
  return estimation_error(est, truth, t_l2, match_components(est, truth));
}

double clustering_accuracy(const std::vector<int>& clusters, const std::vector<int>& labels) {
  require(clusters.size() == labels.size() && !labels.empty(), "accuracy needs one label per item");
  int width = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(clusters[i] >= 0 && labels[i] >= 0, "labels must be non-negative");
    width = std::max({width, clusters[i] + 1, labels[i] + 1});
  }
  Matrix cost = Matrix::Zero(width, width);
  for (std::size_t i = 0; i < labels.size(); ++i) cost(clusters[i], labels[i]) -= 1.0;
  const auto assignment = hungarian(cost);
  double hits = 0.0;
  for (Index c = 0; c < width; ++c) hits -= cost(c, assignment[static_cast<std::size_t>(c)]);
  return hits / static_cast<double>(labels.size());
}

std::vector<int> cluster_of_label(const std::vector<int>& clusters, const std::vector<int>& labels, int k) {
  require(clusters.size() == labels.size(), "one cluster per label expected");
  Matrix cost = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(clusters[i] >= 0 && clusters[i] < k && labels[i] >= 0 && labels[i] < k, "label outside 0..k-1");
    cost(labels[i], clusters[i]) -= 1.0;
  }
  return hungarian(cost);
}

namespace {
std::vector<int> true_labels(const std::vector<TaskBatch>& tasks) {
  std::vector<int> labels;
  labels.reserve(tasks.size());
  for (const auto& t : tasks) {
    if (!t.true_component) throw PreconditionError("task is missing its true component label");
    labels.push_back(*t.true_component);
  }
  return labels;
}
}  // namespace

double clustering_accuracy(const Partition& partition, const std::vector<TaskBatch>& tasks) {
  return clustering_accuracy(partition.labels, true_labels(tasks));
}

double classification_accuracy(const std::vector<int>& assigned, const std::vector<TaskBatch>& tasks,
                               const std::vector<int>& cluster_of_label) {
  const auto labels = true_labels(tasks);
  require(assigned.size() == labels.size() && !labels.empty(), "accuracy needs one assignment per task");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] < static_cast<int>(cluster_of_label.size()), "label outside the cluster map");
    if (assigned[i] == cluster_of_label[static_cast<std::size_t>(labels[i])]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

PredictionReport prediction_error(const FittedModel& model, const MetaParams& truth, Index tau, Index trials,
                                  std::uint64_t seed, unsigned threads) {
  require(tau >= 1 && trials >= 1, "prediction error needs tau >= 1 and trials >= 1");
  require(model.dim() == truth.dim(), "model and truth dimensions differ");

  // Per-trial results: train MAP, train Bayes, test MAP, test Bayes, param MAP, param Bayes.
  Matrix per_trial(trials, 6);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    const TaskBatch full = make_task(truth, tau + 1, seed, StreamTag::Prediction, trial);
    TaskBatch train{full.X.topRows(tau), full.y.head(tau), full.true_component};
    const Vector x_test = full.X.row(tau).transpose();
    const double y_test = full.y(tau);
    const Vector beta = truth.W.col(*full.true_component);

    const auto weights = posterior_log_weights(train, model);
    const Vector map = predict_map(weights, model).beta;
    const Vector bayes = predict_bayes(weights, model);
    const auto row = static_cast<Index>(trial);
    per_trial(row, 0) = (train.y - train.X * map).squaredNorm() / static_cast<double>(tau);
    per_trial(row, 1) = (train.y - train.X * bayes).squaredNorm() / static_cast<double>(tau);
    per_trial(row, 2) = std::pow(y_test - predict_y(x_test, map), 2);
    per_trial(row, 3) = std::pow(y_test - predict_y(x_test, bayes), 2);
    per_trial(row, 4) = (map - beta).squaredNorm();
    per_trial(row, 5) = (bayes - beta).squaredNorm();
  });

  const Vector mean = per_trial.colwise().mean().transpose();
  auto standard_error = [&](Index col) {
    if (trials < 2) return 0.0;
    const double var = (per_trial.col(col).array() - mean(col)).square().sum() / static_cast<double>(trials - 1);
    return std::sqrt(var / static_cast<double>(trials));
  };
  PredictionReport out;
  out.train_mse_map = mean(0);
  out.train_mse_bayes = mean(1);
  out.test_mse_map = mean(2);
  out.test_mse_bayes = mean(3);
  out.param_err_map = mean(4);
  out.param_err_bayes = mean(5);
  out.test_mse_map_se = standard_error(2);
  out.test_mse_bayes_se = standard_error(3);
  return out;
}

}  // namespace metalr

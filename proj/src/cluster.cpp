#include "metalr/cluster.hpp"

#include "metalr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metalr {

BatchEstimates batch_estimates(const TaskBatch& task, const Subspace& U, Index L) {
  validate_task(task);
  require(L >= 1, "need at least one batch pair");
  require(task.size() >= 2 * L, "batch estimates need t >= 2L");
  require(task.dim() == U.dim(), "task and subspace dimensions differ");
  const Index m = task.size() / (2 * L);
  BatchEstimates out;
  out.batches = L;
  out.gamma.resize(U.rank(), 2 * L);
  for (Index l = 0; l < 2 * L; ++l) {
    const Vector mean = task.X.middleRows(l * m, m).transpose() * task.y.segment(l * m, m) / static_cast<double>(m);
    out.gamma.col(l) = U.basis().transpose() * mean;
  }
  return out;
}

double median(std::span<const double> values) {
  require(!values.empty(), "median of an empty list");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

DistanceMatrix pairwise_distance(const std::vector<BatchEstimates>& estimates, unsigned threads) {
  const Index n = static_cast<Index>(estimates.size());
  DistanceMatrix out;
  out.H = Matrix::Zero(n, n);
  if (n == 0) return out;
  const Index L = estimates.front().batches;
  for (const auto& e : estimates)
    require(e.batches == L && e.gamma.cols() == 2 * L && e.gamma.rows() == estimates.front().gamma.rows(),
            "batch estimates disagree on L or k");
  out.batches = L;

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
    const Index i = static_cast<Index>(row);
    std::vector<double> per_batch(static_cast<std::size_t>(L));
    const Matrix& gi = estimates[row].gamma;
    for (Index j = i + 1; j < n; ++j) {
      const Matrix& gj = estimates[static_cast<std::size_t>(j)].gamma;
      for (Index l = 0; l < L; ++l)
        per_batch[static_cast<std::size_t>(l)] = (gi.col(l) - gj.col(l)).dot(gi.col(l + L) - gj.col(l + L));
      out.H(i, j) = median(per_batch);
    }
  });
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) out.H(j, i) = out.H(i, j);
  return out;
}

DistanceMatrix pairwise_distance(const std::vector<TaskBatch>& tasks, const Subspace& U, Index L, unsigned threads) {
  std::vector<BatchEstimates> estimates(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) { estimates[i] = batch_estimates(tasks[i], U, L); });
  return pairwise_distance(estimates, threads);
}

Linkage parse_linkage(const std::string& name) {
  if (name == "single") return Linkage::Single;
  if (name == "average") return Linkage::Average;
  throw PreconditionError("unknown linkage: " + name);
}

std::string to_string(Linkage linkage) { return linkage == Linkage::Single ? "single" : "average"; }

Partition agglomerate(const DistanceMatrix& dm, Index k, Linkage linkage) {
  const Index n = dm.H.rows();
  require(dm.H.cols() == n, "distance matrix must be square");
  require(k >= 1 && n >= k, "clustering needs n_H >= k >= 1");

  Matrix D = dm.H;
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<double> weight(static_cast<std::size_t>(n), 1.0);
  std::vector<Index> parent(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;

  // Row minima over active columns to the right of each active row.
  std::vector<double> row_min(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<Index> row_arg(static_cast<std::size_t>(n), -1);
  auto rescan = [&](Index x) {
    double best = std::numeric_limits<double>::infinity();
    Index arg = -1;
    for (Index y = x + 1; y < n; ++y)
      if (active[static_cast<std::size_t>(y)] && D(x, y) < best) {
        best = D(x, y);
        arg = y;
      }
    row_min[static_cast<std::size_t>(x)] = best;
    row_arg[static_cast<std::size_t>(x)] = arg;
  };
  for (Index x = 0; x < n; ++x) rescan(x);

  for (Index clusters = n; clusters > k; --clusters) {
    Index a = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index x = 0; x < n; ++x)
      if (active[static_cast<std::size_t>(x)] && row_arg[static_cast<std::size_t>(x)] >= 0 &&
          (a < 0 || row_min[static_cast<std::size_t>(x)] < best)) {
        best = row_min[static_cast<std::size_t>(x)];
        a = x;
      }
    const Index b = row_arg[static_cast<std::size_t>(a)];
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);

    for (Index x = 0; x < n; ++x) {
      if (!active[static_cast<std::size_t>(x)] || x == a || x == b) continue;
      const double merged = linkage == Linkage::Single
                                ? std::min(D(a, x), D(b, x))
                                : (weight[ua] * D(a, x) + weight[ub] * D(b, x)) / (weight[ua] + weight[ub]);
      D(a, x) = merged;
      D(x, a) = merged;
    }
    active[ub] = false;
    weight[ua] += weight[ub];
    parent[ub] = a;

    for (Index x = 0; x < b; ++x) {
      const auto ux = static_cast<std::size_t>(x);
      if (!active[ux]) continue;
      if (x == a) {
        rescan(x);
      } else if (x < a) {
        if (row_arg[ux] == a || row_arg[ux] == b) {
          rescan(x);
        } else if (D(x, a) < row_min[ux] || (D(x, a) == row_min[ux] && a < row_arg[ux])) {
          row_min[ux] = D(x, a);
          row_arg[ux] = a;
        }
      } else if (row_arg[ux] == b) {
        rescan(x);
      }
    }
  }

  auto root = [&](Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  Partition out;
  out.clusters = static_cast<int>(k);
  out.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> label_of_root(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(root(i));
    if (label_of_root[r] < 0) label_of_root[r] = next++;
    out.labels[static_cast<std::size_t>(i)] = label_of_root[r];
  }
  return out;
}

Partition single_linkage(const DistanceMatrix& H, Index k) { return agglomerate(H, k, Linkage::Single); }
Partition average_linkage(const DistanceMatrix& H, Index k) { return agglomerate(H, k, Linkage::Average); }

Index default_batch_count(Index n_h, Index t_h, Index k, double delta) {
  require(n_h >= 1 && k >= 1 && t_h >= 2, "batch count needs n_H >= 1, k >= 1, t_H >= 2");
  require(delta > 0.0 && delta < 1.0, "failure probability must lie in (0, 1)");
  const auto by_confidence = static_cast<Index>(std::ceil(std::log2(static_cast<double>(n_h) / delta)));
  const Index min_block = 10 * static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(k))));
  const Index by_block = t_h / (2 * min_block);
  return std::max<Index>(1, std::min(by_confidence, by_block));
}

double residual_scale(const std::vector<const TaskBatch*>& tasks, const Vector& w) {
  double sum = 0.0;
  Index count = 0;
  for (const TaskBatch* task : tasks) {
    const Index half = task->size() / 2;
    const Index rest = task->size() - half;
    if (rest == 0) continue;
    sum += (task->y.tail(rest) - task->X.bottomRows(rest) * w).squaredNorm();
    count += rest;
  }
  if (count == 0) throw NumericalError("cluster has no examples for the residual scale");
  return sum / static_cast<double>(count);
}

ClusterModel initial_estimates(const std::vector<TaskBatch>& tasks, const Partition& partition, const Subspace& U) {
  require(partition.labels.size() == tasks.size(), "partition size differs from task count");
  require(partition.clusters >= 1, "partition needs at least one cluster");
  const Index k = partition.clusters;
  const Index d = U.dim();
  const auto members = partition.members();

  ClusterModel model;
  model.assignments = partition;
  model.w_tilde.resize(d, k);
  model.r2_tilde.resize(k);
  model.p_tilde.resize(k);
  for (Index c = 0; c < k; ++c) {
    const auto& group = members[static_cast<std::size_t>(c)];
    require(!group.empty(), "partition has an empty cluster");
    Vector moment = Vector::Zero(d);
    Index count = 0;
    std::vector<const TaskBatch*> group_tasks;
    for (std::size_t i : group) {
      const TaskBatch& task = tasks[i];
      require(task.dim() == d, "task and subspace dimensions differ");
      const Index half = task.size() / 2;
      moment.noalias() += task.X.topRows(half).transpose() * task.y.head(half);
      count += half;
      group_tasks.push_back(&task);
    }
    if (count == 0) throw NumericalError("cluster has no examples for its mean estimate");
    const Vector mean = moment / static_cast<double>(count);
    model.w_tilde.col(c) = U.basis() * (U.basis().transpose() * mean);
    model.r2_tilde(c) = residual_scale(group_tasks, model.w_tilde.col(c));
    model.p_tilde(c) = static_cast<double>(group.size()) / static_cast<double>(tasks.size());
  }
  return model;
}

}  // namespace metalr

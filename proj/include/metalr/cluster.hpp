#pragma once

#include "metalr/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace metalr {

/// Projected block means of one heavy task. Column l (0-based, l < 2L) is
/// U^T times the mean of y x over the l-th block of floor(t / 2L)
/// consecutive examples. Blocks l and l + L form batch l.
struct BatchEstimates {
  Matrix gamma;  // k x 2L
  Index batches = 0;
};

BatchEstimates batch_estimates(const TaskBatch& task, const Subspace& U, Index L);

/// Median-boosted inner-product distances between heavy tasks:
/// H_ij = median_l (g_i^l - g_j^l) . (g_i^{l+L} - g_j^{l+L}).
struct DistanceMatrix {
  Matrix H;
  Index batches = 0;
};

DistanceMatrix pairwise_distance(const std::vector<BatchEstimates>& estimates, unsigned threads = 1);
DistanceMatrix pairwise_distance(const std::vector<TaskBatch>& tasks, const Subspace& U, Index L,
                                 unsigned threads = 1);

/// Middle order statistic; the mean of the two middle values for even sizes.
double median(std::span<const double> values);

enum class Linkage { Single, Average };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage linkage);

/// Agglomerative clustering of H into exactly k clusters. Each step merges
/// the closest pair of clusters; ties go to the pair whose smallest member
/// indices are lexicographically smallest. Labels are numbered by the
/// smallest member of each cluster.
Partition agglomerate(const DistanceMatrix& H, Index k, Linkage linkage);

/// Single linkage: cluster distance is the minimum cross-pair entry of H.
Partition single_linkage(const DistanceMatrix& H, Index k);
/// Average linkage (UPGMA): cluster distance is the mean cross-pair entry.
Partition average_linkage(const DistanceMatrix& H, Index k);

/// Number of batch pairs L used when the caller asks for the default:
/// ceil(log2(n_H / delta)), capped so that every block holds at least
/// 10 * ceil(sqrt(k)) examples, and at least 1.
Index default_batch_count(Index n_h, Index t_h, Index k, double delta = 0.05);

/// w~, r~^2 and p~ for each cluster. Each task's first floor(t/2) examples
/// form w~ = U U^T mean(y x); the remaining examples give
/// r~^2 = mean (y - x^T w~)^2.
ClusterModel initial_estimates(const std::vector<TaskBatch>& tasks, const Partition& partition, const Subspace& U);

/// r~^2 of one cluster for a fixed w: mean squared residual over the second
/// half (examples floor(t/2)..t-1) of every task.
double residual_scale(const std::vector<const TaskBatch*>& tasks, const Vector& w);

}  // namespace metalr

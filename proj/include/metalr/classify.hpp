#pragma once

#include "metalr/model.hpp"

#include <vector>

namespace metalr {

/// Objective of assigning `task` to each cluster:
/// sum_j (y_j - x_j^T w~_l)^2 / (2 r~_l^2) + t log r~_l.
Vector classification_objectives(const TaskBatch& task, const ClusterModel& model);

/// argmin of classification_objectives; ties go to the smallest index.
int classify_task(const TaskBatch& task, const ClusterModel& model);

struct RefineResult {
  FittedModel model;
  std::vector<int> light_assignments;  // cluster of every light-2 task
  std::vector<Index> examples;         // pooled example count per cluster
};

/// Classifies each light-2 task, pools it with the cluster's heavy tasks and
/// re-estimates every component: w^ by least squares on the pool,
/// s^2 = RSS / (m - d), p^ = (light-2 tasks in the cluster) / n_L2.
/// Clusters with m <= d get the minimum-norm solution and are marked
/// degenerate; with no light-2 tasks p^ is marked invalid.
RefineResult refine(const std::vector<TaskBatch>& heavy, const std::vector<TaskBatch>& light2,
                    const ClusterModel& model, Index d, unsigned threads = 1);

}  // namespace metalr

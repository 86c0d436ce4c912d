#pragma once

#include "metalr/model.hpp"

#include <cstdint>
#include <vector>

namespace metalr {

/// rho^-1 max_i ||(U U^T - I) w_i||.
double subspace_error(const Subspace& U, const MetaParams& meta);

/// Minimum-cost assignment for a square cost matrix (Hungarian method,
/// O(n^3)). Returns assignment[row] = column.
std::vector<int> hungarian(const Matrix& cost);

/// Matches estimated components to true ones by minimizing
/// sum ||w^_i - w_l||. Returns match[l] = estimated index paired with true
/// component l.
std::vector<int> match_components(const FittedModel& est, const MetaParams& truth);

/// Smallest eps with, for every true component l and its match i:
/// ||w^_i - w_l|| <= eps s_l, |s^2_i - s_l^2| <= eps s_l^2 / sqrt(d), and
/// |p^_i - p_l| <= eps sqrt(t_L2 / d) p_l.
double estimation_error(const FittedModel& est, const MetaParams& truth, Index t_l2, const std::vector<int>& match);
double estimation_error(const FittedModel& est, const MetaParams& truth, Index t_l2);

/// Best fraction of items whose cluster maps to their label under a
/// one-to-one cluster-to-label matching.
double clustering_accuracy(const std::vector<int>& clusters, const std::vector<int>& labels);
double clustering_accuracy(const Partition& partition, const std::vector<TaskBatch>& tasks);

/// Fraction of tasks whose assigned cluster equals `cluster_of_label[z]`
/// for their true label z.
double classification_accuracy(const std::vector<int>& assigned, const std::vector<TaskBatch>& tasks,
                               const std::vector<int>& cluster_of_label);

/// cluster_of_label[z] for each true label z, taken from the one-to-one
/// matching that maximizes agreement between `clusters` and `labels`.
std::vector<int> cluster_of_label(const std::vector<int>& clusters, const std::vector<int>& labels, int k);

struct PredictionReport {
  double train_mse_map = 0.0;
  double train_mse_bayes = 0.0;
  double test_mse_map = 0.0;
  double test_mse_bayes = 0.0;
  double param_err_map = 0.0;    // mean ||beta^ - beta||^2
  double param_err_bayes = 0.0;
  double test_mse_map_se = 0.0;  // standard errors of the two test MSEs
  double test_mse_bayes_se = 0.0;
};

/// Monte Carlo prediction errors: each trial draws a fresh task from `truth`
/// with tau training examples and one test example and scores both
/// predictors fitted with `model`.
PredictionReport prediction_error(const FittedModel& model, const MetaParams& truth, Index tau, Index trials,
                                  std::uint64_t seed, unsigned threads = 1);

}  // namespace metalr

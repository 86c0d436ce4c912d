#pragma once

#include "metalr/model.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace metalr {

/// Perturbed-truth initialization: W0 = P_ball(W + Z) with Z_ij ~ N(0, gamma2)
/// and each column projected onto the unit ball; s0 = |q|, q ~ N(s, 0.1 I);
/// p0 = |z| / ||z||_1, z ~ N(p, I / k). `deterministic` drops the s and p
/// perturbations (W still receives the gamma2 noise).
FittedModel em_init_perturbed(const MetaParams& truth, double gamma2, std::uint64_t seed, bool deterministic = false);

struct EmOptions {
  int max_iters = 500;
  double tol = 1e-7;
  unsigned threads = 1;
  /// Called after every E-step with the current parameters and the mean
  /// per-task log-likelihood they achieve.
  std::function<void(int, const FittedModel&, double)> observer;
};

struct EmResult {
  FittedModel model;
  std::vector<double> trace;  // mean per-task log-likelihood, one entry per E-step
  Matrix responsibilities;    // n x k
  int iterations = 0;         // completed M-steps
  bool converged = false;
  bool collapsed = false;
};

/// EM for a mixture of linear regressions with task-level latent labels.
///
/// E-step: r_il proportional to p_l N(y_i; X_i w_l, s2_l I) over each task's
/// examples. M-step: w_l by responsibility-weighted least squares, s2_l as
/// weighted RSS over weighted example count (floored at 1e-10), p_l as the
/// mean responsibility. Stops once the mean log-likelihood improves by less
/// than `tol`. A component whose weighted example count falls below d keeps
/// its previous parameters, is marked degenerate and the run is reported as
/// collapsed (never converged).
///
/// Per-task Gram matrices are cached, so memory grows as n d^2 / 2 doubles.
EmResult em_fit(const std::vector<TaskBatch>& tasks, const FittedModel& init, const EmOptions& options = {});

/// Mean over tasks of log sum_l p_l N(y_i; X_i w_l, s2_l I).
double mixture_log_likelihood(const std::vector<TaskBatch>& tasks, const FittedModel& model, unsigned threads = 1);

}  // namespace metalr

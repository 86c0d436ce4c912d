#pragma once

#include "metalr/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace metalr {

/// Ground-truth meta-parameters of a mixture of linear regressions.
///
/// Column i of `W` is the regression vector of component i, `s` holds the
/// per-component noise scales and `p` the mixing weights.
struct MetaParams {
  Matrix W;  // d x k
  Vector s;  // k
  Vector p;  // k

  Index dim() const { return W.rows(); }
  Index components() const { return W.cols(); }

  /// min_{i != j} ||w_i - w_j||; +inf when k == 1.
  double separation() const;
  /// max_i sqrt(s_i^2 + ||w_i||^2).
  double scale() const;
  double min_weight() const;
  /// Smallest eigenvalue of sum_j p_j w_j w_j^T above 1e-9 * rho^2.
  double min_nonzero_eigenvalue() const;
};

enum class MetaViolation { InvalidSimplex, NonPositiveNoise, ScaleExceedsOne, ZeroSeparation, ShapeMismatch };

std::string to_string(MetaViolation v);

/// Every invariant violated by `params` (empty when valid).
std::vector<MetaViolation> check_meta(const MetaParams& params);

class InvalidMetaParams : public PreconditionError {
 public:
  explicit InvalidMetaParams(std::vector<MetaViolation> violations);
  const std::vector<MetaViolation>& violations() const { return violations_; }

 private:
  std::vector<MetaViolation> violations_;
};

/// Throws InvalidMetaParams listing every violated invariant.
void validate_meta(const MetaParams& params);

/// One task: t examples (rows of X) with responses y.
struct TaskBatch {
  Matrix X;  // t x d
  Vector y;  // t
  std::optional<int> true_component;

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

void validate_task(const TaskBatch& task);

struct PoolSizes {
  Index n_l1 = 1, t_l1 = 2;
  Index n_h = 1, t_h = 1;
  Index n_l2 = 1, t_l2 = 1;
};

/// The three datasets consumed by the pipeline: light tasks for the
/// subspace, heavy tasks for clustering, light tasks for classification.
struct TaskPool {
  PoolSizes sizes;
  std::vector<TaskBatch> light1;
  std::vector<TaskBatch> heavy;
  std::vector<TaskBatch> light2;
};

void validate_pool(const TaskPool& pool);

/// Orthonormal d x k basis.
class Subspace {
 public:
  explicit Subspace(Matrix basis);
  const Matrix& basis() const { return basis_; }
  Index dim() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }
  Matrix projector() const { return basis_ * basis_.transpose(); }

 private:
  Matrix basis_;
};

/// Hard partition of n items into k labelled groups 0..k-1.
struct Partition {
  std::vector<int> labels;
  int clusters = 0;

  std::vector<std::vector<std::size_t>> members() const;
  std::vector<std::size_t> sizes() const;
};

/// Output of the clustering stage: memberships of the heavy tasks and the
/// initial per-cluster estimates.
struct ClusterModel {
  Partition assignments;
  Matrix w_tilde;   // d x k
  Vector r2_tilde;  // k
  Vector p_tilde;   // k

  Index components() const { return w_tilde.cols(); }
};

void validate_cluster_model(const ClusterModel& model);

/// Refined estimates (W_hat, s2_hat, p_hat). Components whose noise could
/// not be estimated are marked in `degenerate`; `p_valid` is false when no
/// classification tasks were available to estimate the weights.
struct FittedModel {
  Matrix W_hat;   // d x k
  Vector s2_hat;  // k
  Vector p_hat;   // k
  std::vector<bool> degenerate;
  bool p_valid = true;

  Index dim() const { return W_hat.rows(); }
  Index components() const { return W_hat.cols(); }

  static FittedModel from_truth(const MetaParams& truth);
};

}  // namespace metalr

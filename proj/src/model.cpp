#include "metalr/model.hpp"

#include "metalr/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace metalr {

double MetaParams::separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < W.cols(); ++i)
    for (Index j = i + 1; j < W.cols(); ++j) best = std::min(best, (W.col(i) - W.col(j)).norm());
  return best;
}

double MetaParams::scale() const {
  double rho = 0.0;
  for (Index i = 0; i < W.cols(); ++i) rho = std::max(rho, std::sqrt(s(i) * s(i) + W.col(i).squaredNorm()));
  return rho;
}

double MetaParams::min_weight() const { return p.minCoeff(); }

double MetaParams::min_nonzero_eigenvalue() const {
  Matrix M = Matrix::Zero(W.rows(), W.rows());
  for (Index j = 0; j < W.cols(); ++j) M.noalias() += p(j) * W.col(j) * W.col(j).transpose();
  const double rho = scale();
  const auto eig = symmetric_eigen(SymMatrix(M));
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > 1e-9 * rho * rho) best = std::min(best, eig.values(i));
  return best;
}

std::string to_string(MetaViolation v) {
  switch (v) {
    case MetaViolation::InvalidSimplex: return "invalid-simplex";
    case MetaViolation::NonPositiveNoise: return "non-positive-noise";
    case MetaViolation::ScaleExceedsOne: return "scale-exceeds-one";
    case MetaViolation::ZeroSeparation: return "zero-separation";
    case MetaViolation::ShapeMismatch: return "shape-mismatch";
  }
  return "unknown";
}

std::vector<MetaViolation> check_meta(const MetaParams& params) {
  const Index k = params.W.cols();
  if (k < 1 || params.s.size() != k || params.p.size() != k || params.W.rows() < 1)
    return {MetaViolation::ShapeMismatch};

  std::vector<MetaViolation> out;
  if (std::abs(params.p.sum() - 1.0) > 1e-12 || (params.p.array() <= 0.0).any() || !params.p.allFinite())
    out.push_back(MetaViolation::InvalidSimplex);
  if ((params.s.array() <= 0.0).any() || !params.s.allFinite()) out.push_back(MetaViolation::NonPositiveNoise);
  if (!(params.scale() <= 1.0 + 1e-9)) out.push_back(MetaViolation::ScaleExceedsOne);
  if (k >= 2 && !(params.separation() > 0.0)) out.push_back(MetaViolation::ZeroSeparation);
  return out;
}

namespace {
std::string describe(const std::vector<MetaViolation>& violations) {
  std::ostringstream os;
  os << "invalid meta-parameters:";
  for (auto v : violations) os << ' ' << to_string(v);
  return os.str();
}
}  // namespace

InvalidMetaParams::InvalidMetaParams(std::vector<MetaViolation> violations)
    : PreconditionError(describe(violations)), violations_(std::move(violations)) {}

void validate_meta(const MetaParams& params) {
  auto violations = check_meta(params);
  if (!violations.empty()) throw InvalidMetaParams(std::move(violations));
}

void validate_task(const TaskBatch& task) {
  require(task.X.rows() >= 1, "task must contain at least one example");
  require(task.X.rows() == task.y.size(), "task X and y row counts differ");
}

void validate_pool(const TaskPool& pool) {
  require(pool.sizes.t_l1 >= 2, "light-1 tasks need at least two examples");
  require(static_cast<Index>(pool.light1.size()) == pool.sizes.n_l1, "light-1 collection size mismatch");
  require(static_cast<Index>(pool.heavy.size()) == pool.sizes.n_h, "heavy collection size mismatch");
  require(static_cast<Index>(pool.light2.size()) == pool.sizes.n_l2, "light-2 collection size mismatch");
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  require(basis_.cols() >= 1 && basis_.rows() >= basis_.cols(), "subspace basis must be d x k with k <= d");
  const Matrix gram = basis_.transpose() * basis_;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  require(err <= 1e-10, "subspace basis columns are not orthonormal");
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(clusters), 0);
  for (int label : labels) ++out[static_cast<std::size_t>(label)];
  return out;
}

void validate_cluster_model(const ClusterModel& model) {
  const Index k = model.w_tilde.cols();
  require(model.r2_tilde.size() == k && model.p_tilde.size() == k, "cluster model shape mismatch");
  require(model.assignments.clusters == k, "cluster model must have exactly k clusters");
  for (auto n : model.assignments.sizes()) require(n > 0, "cluster model has an empty cluster");
  require((model.r2_tilde.array() > 0.0).all(), "cluster residual scales must be positive");
  require(std::abs(model.p_tilde.sum() - 1.0) <= 1e-12, "cluster weights must sum to one");
}

FittedModel FittedModel::from_truth(const MetaParams& truth) {
  FittedModel m;
  m.W_hat = truth.W;
  m.s2_hat = truth.s.array().square();
  m.p_hat = truth.p;
  m.degenerate.assign(static_cast<std::size_t>(truth.components()), false);
  return m;
}

}  // namespace metalr

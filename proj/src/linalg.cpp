#include "metalr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace metalr {

SymMatrix::SymMatrix(Matrix a) : a_(std::move(a)) {
  require(a_.rows() == a_.cols(), "symmetric matrix must be square");
  const Index n = a_.rows();
  const double scale = std::max(1.0, n > 0 ? a_.cwiseAbs().maxCoeff() : 0.0);
  double asym = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) asym = std::max(asym, std::abs(a_(i, j) - a_(j, i)));
  require(asym <= 1e-12 * scale, "matrix is not symmetric");
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) a_(j, i) = a_(i, j);
}

namespace {

std::vector<Index> order_by_magnitude(const Vector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  return order;
}

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < j; ++i) sum += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(sum);
}

// Cholesky solve of G x = b; nullopt when G is not safely positive definite.
std::optional<Vector> cholesky_solve(const Matrix& G, const Vector& b) {
  const Index n = G.rows();
  Matrix L = Matrix::Zero(n, n);
  double max_pivot = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    double diag = G(j, j);
    for (Index p = 0; p < j; ++p) diag -= L(j, p) * L(j, p);
    if (!(diag > 0.0)) return std::nullopt;
    max_pivot = std::max(max_pivot, diag);
    min_pivot = std::min(min_pivot, diag);
    const double ljj = std::sqrt(diag);
    L(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double v = G(i, j);
      for (Index p = 0; p < j; ++p) v -= L(i, p) * L(j, p);
      L(i, j) = v / ljj;
    }
  }
  // Squared pivots track the eigenvalue spread of G.
  if (n > 0 && min_pivot < 1e-10 * max_pivot) return std::nullopt;

  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    double v = b(i);
    for (Index p = 0; p < i; ++p) v -= L(i, p) * z(p);
    z(i) = v / L(i, i);
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double v = z(i);
    for (Index p = i + 1; p < n; ++p) v -= L(p, i) * x(p);
    x(i) = v / L(i, i);
  }
  return x;
}

}  // namespace

EigenDecomposition symmetric_eigen(const SymMatrix& sym) {
  Matrix a = sym.dense();
  const Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double norm = a.norm();
  const double target = 1e-12 * norm;

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = a(r, p);
          const double h = a(r, q);
          const double rp = g - s * (h + g * tau);
          const double rq = h + s * (g - h * tau);
          a(r, p) = rp;
          a(p, r) = rp;
          a(r, q) = rq;
          a(q, r) = rq;
        }
        for (Index r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double h = v(r, q);
          v(r, p) = g - s * (h + g * tau);
          v(r, q) = h + s * (g - h * tau);
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw NumericalError("Jacobi eigensolver did not converge");

  const Vector diag = a.diagonal();
  const auto order = order_by_magnitude(diag);
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    out.values(i) = diag(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

TopEigen top_k_eig(const SymMatrix& a, Index k) {
  require(k >= 1 && k <= a.size(), "top_k_eig requires 1 <= k <= d");
  auto eig = symmetric_eigen(a);
  return TopEigen{eig.values.head(k), Subspace(eig.vectors.leftCols(k))};
}

SvdResult jacobi_svd(const Matrix& X) {
  Matrix a = X;
  const Index n = a.cols();
  Matrix v = Matrix::Identity(n, n);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 100;
  // Columns already annihilated by rank deficiency carry only rounding noise;
  // rotating them against each other never settles.
  const double negligible = std::pow(static_cast<double>(std::max(a.rows(), n)) * kEps * a.norm(), 2);

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index r = 0; r < a.rows(); ++r) {
          const double ap = a(r, p);
          const double aq = a(r, q);
          a(r, p) = c * ap - s * aq;
          a(r, q) = s * ap + c * aq;
        }
        for (Index r = 0; r < n; ++r) {
          const double vp = v(r, p);
          const double vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep == kMaxSweeps) throw NumericalError("one-sided Jacobi SVD did not converge");

  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms(j) = a.col(j).norm();
  const auto order = order_by_magnitude(norms);
  const Index r = std::min(a.rows(), n);
  SvdResult out;
  out.U = Matrix::Zero(a.rows(), r);
  out.sigma.resize(r);
  out.V.resize(n, r);
  for (Index i = 0; i < r; ++i) {
    const Index j = order[static_cast<std::size_t>(i)];
    out.sigma(i) = norms(j);
    out.V.col(i) = v.col(j);
    if (norms(j) > 0.0) out.U.col(i) = a.col(j) / norms(j);
  }
  return out;
}

Vector least_squares(const Matrix& X, const Vector& y) {
  require(X.rows() >= 1, "least squares needs at least one row");
  require(X.rows() == y.size(), "least squares dimension mismatch");
  const Matrix G = X.transpose() * X;
  const Vector b = X.transpose() * y;
  if (auto beta = cholesky_solve(G, b)) return *beta;

  const auto svd = jacobi_svd(X);
  // Null directions of a rank-deficient X come out of Jacobi at roughly
  // 1e-14 sigma_1, so the cutoff has to sit well above rounding level.
  const double cutoff = 1e-10 * (svd.sigma.size() > 0 ? svd.sigma(0) : 0.0);
  Vector beta = Vector::Zero(X.cols());
  for (Index i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma(i) > cutoff) beta += svd.V.col(i) * (svd.U.col(i).dot(y) / svd.sigma(i));
  return beta;
}

Vector least_squares_gram(const Matrix& G, const Vector& b) {
  require(G.rows() == G.cols() && G.rows() == b.size(), "normal equations dimension mismatch");
  if (auto beta = cholesky_solve(G, b)) return *beta;

  const auto eig = symmetric_eigen(SymMatrix(G));
  const double top = eig.values.size() > 0 ? std::abs(eig.values(0)) : 0.0;
  const double cutoff =
      std::max(1e-12, static_cast<double>(G.rows()) * std::numeric_limits<double>::epsilon()) * top;
  Vector beta = Vector::Zero(G.rows());
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) beta += eig.vectors.col(i) * (eig.vectors.col(i).dot(b) / eig.values(i));
  return beta;
}

}  // namespace metalr

#pragma once

#include "metalr/model.hpp"
#include "metalr/types.hpp"

namespace metalr {

/// Dense symmetric matrix. The upper triangle is authoritative; inputs
/// whose triangles disagree by more than 1e-12 (relative to the largest
/// entry, floored at 1) are rejected.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix a);
  const Matrix& dense() const { return a_; }
  Index size() const { return a_.rows(); }

 private:
  Matrix a_;
};

struct EigenDecomposition {
  Vector values;   // in the order produced by the solver (see below)
  Matrix vectors;  // columns are unit eigenvectors
};

/// Full eigendecomposition by cyclic Jacobi rotations, iterated until the
/// off-diagonal Frobenius norm is at most 1e-12 * ||A||_F. Eigenpairs are
/// sorted by descending |lambda|.
EigenDecomposition symmetric_eigen(const SymMatrix& a);

struct TopEigen {
  Vector values;  // k, descending by |lambda|
  Subspace subspace;
};

/// Top-k eigenpairs by magnitude (the top-k singular vectors of a symmetric
/// matrix).
TopEigen top_k_eig(const SymMatrix& a, Index k);

/// Minimizer of ||X b - y||^2; minimum-norm minimizer when X^T X is
/// singular. Uses Cholesky on the normal equations and falls back to a
/// one-sided Jacobi SVD of X when the squared pivot ratio drops below 1e-10.
Vector least_squares(const Matrix& X, const Vector& y);

/// Same contract as least_squares, from accumulated normal equations
/// G = X^T X, b = X^T y. The fallback pseudo-inverts G spectrally.
Vector least_squares_gram(const Matrix& G, const Vector& b);

struct SvdResult {
  Matrix U;       // m x r
  Vector sigma;   // r, descending
  Matrix V;       // n x r
};

/// Thin SVD by one-sided (Hestenes) Jacobi orthogonalization.
SvdResult jacobi_svd(const Matrix& X);

}  // namespace metalr

#pragma once

// Test-side randomness and small builders. Uses std::mt19937_64 rather than
// the library generator so oracle inputs do not depend on code under test.

#include "metalr/model.hpp"

#include <random>

namespace testutil {

using metalr::Index;
using metalr::Matrix;
using metalr::Vector;

inline Matrix gaussian_matrix(std::mt19937_64& gen, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

inline Vector gaussian_vector(std::mt19937_64& gen, Index n) { return gaussian_matrix(gen, n, 1).col(0); }

inline Matrix random_symmetric(std::mt19937_64& gen, Index n) {
  const Matrix a = gaussian_matrix(gen, n, n);
  return (a + a.transpose()) / 2.0;
}

inline Matrix random_orthonormal(std::mt19937_64& gen, Index rows, Index cols) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(gen, rows, cols));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline metalr::TaskBatch random_task(std::mt19937_64& gen, Index t, Index d, const Vector& w, double s,
                                     int label = 0) {
  metalr::TaskBatch task;
  task.X = gaussian_matrix(gen, t, d);
  task.y = task.X * w + s * gaussian_vector(gen, t);
  task.true_component = label;
  return task;
}

// A valid random model with k components in dimension d.
inline metalr::FittedModel random_model(std::mt19937_64& gen, Index d, Index k) {
  std::uniform_real_distribution<double> unif(0.2, 1.5);
  metalr::FittedModel m;
  m.W_hat = gaussian_matrix(gen, d, k);
  m.s2_hat.resize(k);
  m.p_hat.resize(k);
  for (Index l = 0; l < k; ++l) {
    m.s2_hat(l) = unif(gen);
    m.p_hat(l) = unif(gen);
  }
  m.p_hat /= m.p_hat.sum();
  m.degenerate.assign(static_cast<std::size_t>(k), false);
  return m;
}

}  // namespace testutil

#include "metalr/datagen.hpp"
#include "metalr/eval.hpp"
#include "metalr/subspace.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace metalr;

namespace {

TaskBatch two_example_task() {
  TaskBatch task;
  task.X.resize(2, 2);
  task.X << 1, 0, 0, 1;
  task.y.resize(2);
  task.y << 1, 2;
  return task;
}

// Oracle: element-by-element double loop over tasks and examples, written
// without any matrix products.
Matrix naive_moment(const std::vector<TaskBatch>& tasks) {
  const Index d = tasks.front().dim();
  Matrix m = Matrix::Zero(d, d);
  for (const auto& task : tasks) {
    const Index half = task.size() / 2;
    std::vector<double> b1(static_cast<std::size_t>(d), 0.0), b2(static_cast<std::size_t>(d), 0.0);
    for (Index j = 0; j < half; ++j)
      for (Index c = 0; c < d; ++c) {
        b1[static_cast<std::size_t>(c)] += task.y(j) * task.X(j, c) / static_cast<double>(half);
        b2[static_cast<std::size_t>(c)] += task.y(half + j) * task.X(half + j, c) / static_cast<double>(half);
      }
    for (Index r = 0; r < d; ++r)
      for (Index c = 0; c < d; ++c)
        m(r, c) += b1[static_cast<std::size_t>(r)] * b2[static_cast<std::size_t>(c)] +
                   b2[static_cast<std::size_t>(r)] * b1[static_cast<std::size_t>(c)];
  }
  return m / (2.0 * static_cast<double>(tasks.size()));
}

std::vector<TaskBatch> mixture_tasks(const MetaParams& meta, Index n, Index t, std::uint64_t seed) {
  return sample_tasks(meta, n, t, seed, StreamTag::Light1);
}

}  // namespace

TEST(HalfEstimates, SingleExampleHalves) {
  const HalfEstimates h = half_estimates(two_example_task());
  EXPECT_EQ(h.b1, (Vector(2) << 1, 0).finished());
  EXPECT_EQ(h.b2, (Vector(2) << 0, 2).finished());
}

TEST(HalfEstimates, OddTrailingExampleDropped) {
  TaskBatch task = two_example_task();
  task.X.conservativeResize(3, 2);
  task.X.row(2) << 7, -3;
  task.y.conservativeResize(3);
  task.y(2) = 11;
  const HalfEstimates h = half_estimates(task);
  EXPECT_EQ(h.b1, (Vector(2) << 1, 0).finished());
  EXPECT_EQ(h.b2, (Vector(2) << 0, 2).finished());
}

TEST(HalfEstimates, RejectsSingleExample) {
  TaskBatch task{Matrix::Ones(1, 2), Vector::Ones(1), std::nullopt};
  EXPECT_THROW(half_estimates(task), PreconditionError);
}

TEST(HalfEstimates, ConvergesToRegressionVector) {
  const Index d = 5, t = 10000;
  MetaParams meta{Matrix::Zero(d, 1), Vector::Zero(1), Vector::Ones(1)};
  meta.W(0, 0) = 1.0;
  RandomStream rng(1, {StreamTag::Trial, 0});
  const HalfEstimates h = half_estimates(sample_task(meta, t, rng));
  const double bound = 3.0 * std::sqrt(static_cast<double>(d) / (t / 2.0));
  EXPECT_LE((h.b1 - meta.W.col(0)).norm(), bound);
  EXPECT_LE((h.b2 - meta.W.col(0)).norm(), bound);
}

TEST(MomentMatrix, HandArithmetic) {
  const SymMatrix m = moment_matrix({two_example_task()});
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(m.dense(), expected);
}

TEST(MomentMatrix, RejectsEmpty) { EXPECT_THROW(moment_matrix({}), PreconditionError); }

TEST(MomentMatrix, MatchesNaiveLoopOracle) {
  for (const Index n : {1, 3, 255, 256, 257, 700}) {
    const MetaParams meta = sample_meta_params(3, 7, GenPreset{}, static_cast<std::uint64_t>(n));
    for (const Index t : {2, 3, 6}) {
      const auto tasks = mixture_tasks(meta, n, t, 11);
      const Matrix oracle = naive_moment(tasks);
      const Matrix got = moment_matrix(tasks).dense();
      EXPECT_LT((got - oracle).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n << " t=" << t;
    }
  }
}

TEST(MomentMatrix, NoiselessRankOneMonteCarlo) {
  const Index d = 4;
  MetaParams meta{Matrix::Zero(d, 1), Vector::Zero(1), Vector::Ones(1)};
  meta.W(0, 0) = 0.8;
  const auto tasks = mixture_tasks(meta, 100000, 2, 3);
  Matrix target = Matrix::Zero(d, d);
  target(0, 0) = 0.64;
  const Matrix diff = moment_matrix(tasks).dense() - target;
  EXPECT_LE(diff.operatorNorm(), 0.05);
}

TEST(MomentMatrix, UnbiasedWithinFiveStandardErrors) {
  GenPreset preset;
  preset.kind = PresetKind::RandomUnit;
  const MetaParams meta = sample_meta_params(3, 4, preset, 21);
  const Index n = 100000;
  const auto tasks = mixture_tasks(meta, n, 4, 5);
  const Matrix M = (meta.W * meta.p.asDiagonal() * meta.W.transpose());

  // Per-task symmetrized products give the entrywise sampling spread.
  Matrix sum = Matrix::Zero(4, 4), sum2 = Matrix::Zero(4, 4);
  for (const auto& task : tasks) {
    const HalfEstimates h = half_estimates(task);
    const Matrix term = 0.5 * (h.b1 * h.b2.transpose() + h.b2 * h.b1.transpose());
    sum += term;
    sum2 += term.cwiseProduct(term);
  }
  const Matrix mean = sum / static_cast<double>(n);
  const Matrix se = ((sum2 / static_cast<double>(n) - mean.cwiseProduct(mean)) / static_cast<double>(n)).cwiseSqrt();
  const Matrix estimate = moment_matrix(tasks).dense();
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) EXPECT_LE(std::abs(estimate(i, j) - M(i, j)), 5.0 * se(i, j));
}

TEST(MomentMatrix, PermutationInvariant) {
  const MetaParams meta = sample_meta_params(2, 5, GenPreset{}, 4);
  auto tasks = mixture_tasks(meta, 600, 4, 8);
  const Matrix before = moment_matrix(tasks).dense();
  std::mt19937_64 gen(1);
  std::shuffle(tasks.begin(), tasks.end(), gen);
  const Matrix after = moment_matrix(tasks).dense();
  // Floating-point addition is not associative; compensated summation keeps
  // the reorder effect at the level of a few ulps.
  EXPECT_LT((after - before).cwiseAbs().maxCoeff(), 1e-15 * std::max(1.0, before.cwiseAbs().maxCoeff()) * 10);
}

TEST(MomentMatrix, ResponseScalingScalesQuadratically) {
  const MetaParams meta = sample_meta_params(3, 8, GenPreset{}, 6);
  auto tasks = mixture_tasks(meta, 2000, 4, 9);
  const SymMatrix base = moment_matrix(tasks);
  const double c = 3.0;
  for (auto& task : tasks) task.y *= c;
  const SymMatrix scaled = moment_matrix(tasks);
  EXPECT_LT((scaled.dense() - c * c * base.dense()).cwiseAbs().maxCoeff(), 1e-12 * c * c);
  const Matrix P0 = top_k_eig(base, 3).subspace.projector();
  const Matrix P1 = top_k_eig(scaled, 3).subspace.projector();
  EXPECT_LT((P0 - P1).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MomentMatrix, StreamedMatchesMaterializedAcrossThreadCounts) {
  const MetaParams meta = sample_meta_params(3, 6, GenPreset{}, 7);
  const Index n = 1500;
  const auto tasks = mixture_tasks(meta, n, 3, 12);
  const Matrix reference = moment_matrix(tasks, 1).dense();
  for (const unsigned threads : {1u, 2u, 3u, 8u}) {
    EXPECT_EQ(moment_matrix(tasks, threads).dense(), reference);
    const SymMatrix streamed = moment_matrix_streamed(
        n, 6, [&](std::size_t i) { return make_task(meta, 3, 12, StreamTag::Light1, i); }, threads);
    EXPECT_EQ(streamed.dense(), reference);
  }
}

TEST(EstimateSubspace, ExactMomentRecoversSpan) {
  std::mt19937_64 gen(3);
  const Index d = 10, k = 3;
  const MetaParams meta{testutil::random_orthonormal(gen, d, k) * 0.6, Vector::Constant(k, 0.8),
                        Vector::Constant(k, 1.0 / k)};
  const Matrix M = meta.W * meta.p.asDiagonal() * meta.W.transpose();
  const Subspace U = top_k_eig(SymMatrix(M), k).subspace;
  for (Index i = 0; i < k; ++i) {
    const Vector w = meta.W.col(i);
    EXPECT_LE((U.basis() * (U.basis().transpose() * w) - w).norm(), 1e-8);
  }
}

TEST(EstimateSubspace, ErrorShrinksWithMoreTasks) {
  const MetaParams meta = sample_meta_params(4, 32, GenPreset{}, 2);
  const double small = subspace_error(estimate_subspace(mixture_tasks(meta, 2000, 4, 1), 4), meta);
  const double large = subspace_error(estimate_subspace(mixture_tasks(meta, 32000, 4, 1), 4), meta);
  EXPECT_LT(large, small);
  EXPECT_LT(large, 0.3);
}

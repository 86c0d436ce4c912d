#include "metalr/datagen.hpp"
#include "metalr/em.hpp"
#include "metalr/eval.hpp"
#include "metalr/linalg.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace metalr;

namespace {

// Oracle: mean over tasks of log sum_l p_l N(y_i; X_i w_l, s2_l I), by
// scalar loops in extended precision.
long double direct_log_likelihood(const std::vector<TaskBatch>& tasks, const FittedModel& m) {
  long double total = 0.0L;
  const long double log_two_pi = std::log(2.0L * std::numbers::pi_v<long double>);
  for (const auto& task : tasks) {
    std::vector<long double> logs;
    for (Index l = 0; l < m.components(); ++l) {
      long double rss = 0.0L;
      for (Index j = 0; j < task.size(); ++j) {
        long double fit = 0.0L;
        for (Index c = 0; c < task.dim(); ++c) fit += static_cast<long double>(task.X(j, c)) * m.W_hat(c, l);
        rss += (task.y(j) - fit) * (task.y(j) - fit);
      }
      const long double t = static_cast<long double>(task.size());
      logs.push_back(std::log(static_cast<long double>(m.p_hat(l))) -
                     0.5L * t * (std::log(static_cast<long double>(m.s2_hat(l))) + log_two_pi) -
                     rss / (2.0L * m.s2_hat(l)));
    }
    const long double top = *std::max_element(logs.begin(), logs.end());
    long double sum = 0.0L;
    for (const auto v : logs) sum += std::exp(v - top);
    total += top + std::log(sum);
  }
  return total / static_cast<long double>(tasks.size());
}

std::vector<TaskBatch> pooled(const MetaParams& meta, Index n, Index t, std::uint64_t seed) {
  return sample_tasks(meta, n, t, seed, StreamTag::Heavy);
}

}  // namespace

TEST(EmInit, DeterministicZeroPerturbationIsTruth) {
  const MetaParams meta = sample_meta_params(3, 6, GenPreset{}, 1);
  const FittedModel init = em_init_perturbed(meta, 0.0, 5, true);
  EXPECT_EQ(init.W_hat, meta.W);
  EXPECT_TRUE(init.s2_hat.isApprox(meta.s.array().square().matrix(), 1e-15));
  EXPECT_EQ(init.p_hat, meta.p);
  EXPECT_THROW(em_init_perturbed(meta, -0.1, 5), PreconditionError);
}

TEST(EmInit, ColumnsInUnitBallAndWeightsOnSimplex) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MetaParams meta = sample_meta_params(4, 8, GenPreset{}, seed);
    for (const double g : {0.01, 0.5, 2.0}) {
      const FittedModel init = em_init_perturbed(meta, g, seed);
      for (Index l = 0; l < 4; ++l) EXPECT_LE(init.W_hat.col(l).norm(), 1.0 + 1e-12);
      EXPECT_TRUE((init.p_hat.array() >= 0.0).all());
      EXPECT_NEAR(init.p_hat.sum(), 1.0, 1e-12);
      EXPECT_TRUE((init.s2_hat.array() > 0.0).all());
    }
  }
}

TEST(EmInit, PerturbationNormFollowsChiDistribution) {
  // Replays the documented draw order (W noise column by column on the
  // EmInit stream) to see the perturbation before projection.
  const Index d = 64, k = 200;
  MetaParams meta{Matrix::Zero(d, k), Vector::Constant(k, 0.5), Vector::Constant(k, 1.0 / k)};
  const double gamma2 = 0.5;
  const FittedModel init = em_init_perturbed(meta, gamma2, 77);
  RandomStream rng(77, {StreamTag::EmInit, 0});
  double mean_norm = 0.0;
  for (Index j = 0; j < k; ++j) {
    Vector z(d);
    for (Index i = 0; i < d; ++i) z(i) = std::sqrt(gamma2) * rng.normal();
    mean_norm += z.norm() / k;
    EXPECT_LT((init.W_hat.col(j) - z / std::max(1.0, z.norm())).cwiseAbs().maxCoeff(), 1e-15);
  }
  // E||z|| = gamma sqrt(2) Gamma((d+1)/2) / Gamma(d/2), about sqrt(gamma2 d).
  const double chi_mean = std::sqrt(gamma2) * std::sqrt(2.0) *
                          std::exp(std::lgamma((d + 1) / 2.0) - std::lgamma(d / 2.0));
  EXPECT_NEAR(mean_norm, chi_mean, 5.0 * std::sqrt(gamma2 * 0.5 / k));
  EXPECT_NEAR(chi_mean, std::sqrt(gamma2 * d), 0.05 * std::sqrt(gamma2 * d));
}

TEST(EmFit, SingleComponentIsOrdinaryLeastSquares) {
  const MetaParams meta = sample_meta_params(1, 5, GenPreset{}, 3);
  const auto tasks = pooled(meta, 30, 7, 4);
  FittedModel init = FittedModel::from_truth(meta);
  init.W_hat.setZero();
  EmOptions options;
  options.max_iters = 1;
  const EmResult r = em_fit(tasks, init, options);

  Matrix X(30 * 7, 5);
  Vector y(30 * 7);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    X.middleRows(static_cast<Index>(i) * 7, 7) = tasks[i].X;
    y.segment(static_cast<Index>(i) * 7, 7) = tasks[i].y;
  }
  const Vector ols = least_squares(X, y);
  EXPECT_LT((r.model.W_hat.col(0) - ols).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(r.model.s2_hat(0), (y - X * ols).squaredNorm() / (30.0 * 7.0), 1e-12);
  EXPECT_NEAR(r.model.p_hat(0), 1.0, 1e-15);
  EXPECT_EQ(r.iterations, 1);
}

TEST(EmFit, LikelihoodMonotoneAgainstIndependentOracle) {
  for (int run = 0; run < 20; ++run) {
    GenPreset preset;
    preset.kind = run % 2 ? PresetKind::RandomUnit : PresetKind::Orthonormal;
    const MetaParams meta = sample_meta_params(3, 5, preset, static_cast<std::uint64_t>(run));
    const auto tasks = pooled(meta, 60, 6 + run % 5, static_cast<std::uint64_t>(run));
    const FittedModel init = em_init_perturbed(meta, 0.3, static_cast<std::uint64_t>(run) + 100);

    std::vector<long double> oracle;
    EmOptions options;
    options.max_iters = 60;
    options.observer = [&](int, const FittedModel& m, double reported) {
      const long double direct = direct_log_likelihood(tasks, m);
      EXPECT_NEAR(reported, static_cast<double>(direct), 1e-9 * std::max(1.0L, std::abs(direct)));
      oracle.push_back(direct);
    };
    const EmResult r = em_fit(tasks, init, options);
    ASSERT_EQ(oracle.size(), r.trace.size());
    for (std::size_t i = 1; i < oracle.size(); ++i)
      EXPECT_GE(oracle[i], oracle[i - 1] - 1e-8L) << "run " << run << " step " << i;
    for (Index i = 0; i < r.responsibilities.rows(); ++i)
      EXPECT_NEAR(r.responsibilities.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(EmFit, TruthInitializationImprovesAndConvergesQuickly) {
  const MetaParams meta = sample_meta_params(4, 8, GenPreset{}, 9);
  const auto tasks = pooled(meta, 400, 30, 2);
  const FittedModel init = em_init_perturbed(meta, 0.0, 3);
  const EmResult r = em_fit(tasks, init);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.collapsed);
  EXPECT_LT(r.iterations, 20);
  EXPECT_LE(estimation_error(r.model, meta, 30), estimation_error(init, meta, 30));
}

TEST(EmFit, PermutingComponentsPermutesOutput) {
  const MetaParams meta = sample_meta_params(3, 6, GenPreset{}, 4);
  const auto tasks = pooled(meta, 80, 10, 5);
  const FittedModel init = em_init_perturbed(meta, 0.2, 6);
  const std::vector<Index> perm{2, 0, 1};
  FittedModel permuted = init;
  for (Index l = 0; l < 3; ++l) {
    permuted.W_hat.col(l) = init.W_hat.col(perm[l]);
    permuted.s2_hat(l) = init.s2_hat(perm[l]);
    permuted.p_hat(l) = init.p_hat(perm[l]);
  }
  EmOptions options;
  options.max_iters = 25;
  const EmResult a = em_fit(tasks, init, options);
  const EmResult b = em_fit(tasks, permuted, options);
  for (Index l = 0; l < 3; ++l) {
    EXPECT_LT((b.model.W_hat.col(l) - a.model.W_hat.col(perm[l])).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(b.model.p_hat(l), a.model.p_hat(perm[l]), 1e-9);
  }
}

TEST(EmFit, StarvedComponentCollapses) {
  const MetaParams meta = sample_meta_params(2, 6, GenPreset{}, 7);
  const auto tasks = pooled(meta, 40, 8, 8);
  FittedModel init = FittedModel::from_truth(meta);
  init.W_hat.conservativeResize(6, 3);
  init.W_hat.col(2) = Vector::Constant(6, 50.0);
  init.s2_hat.conservativeResize(3);
  init.s2_hat(2) = 1e-3;
  init.p_hat = Vector::Constant(3, 1.0 / 3.0);
  const EmResult r = em_fit(tasks, init);
  EXPECT_TRUE(r.collapsed);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(r.model.degenerate[2]);
  EXPECT_EQ(r.model.W_hat.col(2), init.W_hat.col(2));
}

TEST(EmFit, ThreadCountDoesNotChangeResult) {
  const MetaParams meta = sample_meta_params(3, 6, GenPreset{}, 10);
  const auto tasks = pooled(meta, 90, 9, 11);
  const FittedModel init = em_init_perturbed(meta, 0.5, 12);
  EmOptions one, four;
  one.max_iters = four.max_iters = 30;
  four.threads = 4;
  const EmResult a = em_fit(tasks, init, one);
  const EmResult b = em_fit(tasks, init, four);
  EXPECT_EQ(a.model.W_hat, b.model.W_hat);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(EmFit, RejectsBadInitialization) {
  const MetaParams meta = sample_meta_params(2, 4, GenPreset{}, 1);
  const auto tasks = pooled(meta, 10, 5, 1);
  FittedModel init = FittedModel::from_truth(meta);
  init.s2_hat(0) = 0.0;
  EXPECT_THROW(em_fit(tasks, init), PreconditionError);
  EXPECT_THROW(em_fit({}, FittedModel::from_truth(meta)), PreconditionError);
}

TEST(MixtureLogLikelihood, MatchesOracle) {
  const MetaParams meta = sample_meta_params(3, 4, GenPreset{}, 2);
  const auto tasks = pooled(meta, 25, 6, 3);
  const FittedModel m = em_init_perturbed(meta, 0.4, 4);
  EXPECT_NEAR(mixture_log_likelihood(tasks, m), static_cast<double>(direct_log_likelihood(tasks, m)), 1e-10);
}

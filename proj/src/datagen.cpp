#include "metalr/datagen.hpp"

#include "metalr/parallel.hpp"

#include <cmath>

namespace metalr {

PresetKind parse_preset_kind(const std::string& name) {
  if (name == "orthonormal") return PresetKind::Orthonormal;
  if (name == "random-unit") return PresetKind::RandomUnit;
  if (name == "lower-bound") return PresetKind::LowerBound;
  throw PreconditionError("unknown preset: " + name);
}

std::string to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::Orthonormal: return "orthonormal";
    case PresetKind::RandomUnit: return "random-unit";
    case PresetKind::LowerBound: return "lower-bound";
  }
  return "unknown";
}

MetaParams sample_meta_params(Index k, Index d, const GenPreset& preset, std::uint64_t seed) {
  require(k >= 1, "need at least one component");
  require(d >= k, "dimension d must be at least k");
  require(preset.sigma > 0.0, "sigma must be positive");

  RandomStream rng(seed, {StreamTag::Meta, 0});
  MetaParams meta;
  meta.p = Vector::Constant(k, 1.0 / static_cast<double>(k));
  meta.s = Vector::Constant(k, preset.sigma);

  switch (preset.kind) {
    case PresetKind::Orthonormal: {
      Matrix G(d, k);
      for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < d; ++i) G(i, j) = rng.normal();
      Eigen::HouseholderQR<Matrix> qr(G);
      meta.W = qr.householderQ() * Matrix::Identity(d, k);
      break;
    }
    case PresetKind::RandomUnit: {
      meta.W.resize(d, k);
      for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < d; ++i) meta.W(i, j) = rng.normal();
        meta.W.col(j).normalize();
      }
      break;
    }
    case PresetKind::LowerBound: {
      require(preset.delta > 0.0, "delta must be positive");
      meta.W = Matrix::Zero(d, k);
      for (Index j = 0; j < k; ++j) meta.W(j, j) = preset.delta / std::sqrt(2.0);
      break;
    }
  }

  const double rho = meta.scale();
  if (preset.kind == PresetKind::LowerBound) {
    if (rho > 1.0) {
      require(preset.rescale, "lower-bound preset has delta^2/2 + sigma^2 > 1 and rescaling is disabled");
      meta.W /= rho;
      meta.s /= rho;
    }
  } else {
    meta.W /= rho;
    meta.s /= rho;
  }
  validate_meta(meta);
  return meta;
}

TaskBatch sample_task(const MetaParams& meta, Index t, RandomStream& rng, FeatureDist features) {
  require(t >= 1, "task needs at least one example");
  const Index d = meta.dim();
  const Index k = meta.components();

  const double u = rng.uniform();
  int z = static_cast<int>(k - 1);
  double cumulative = 0.0;
  for (Index j = 0; j < k; ++j) {
    cumulative += meta.p(j);
    if (u < cumulative) {
      z = static_cast<int>(j);
      break;
    }
  }

  TaskBatch task;
  task.true_component = z;
  task.X.resize(t, d);
  for (Index r = 0; r < t; ++r)
    for (Index c = 0; c < d; ++c) task.X(r, c) = features == FeatureDist::Gaussian ? rng.normal() : rng.rademacher();
  task.y = task.X * meta.W.col(z);
  const double noise = meta.s(z);
  for (Index r = 0; r < t; ++r) task.y(r) += noise * rng.normal();
  return task;
}

TaskBatch make_task(const MetaParams& meta, Index t, std::uint64_t seed, StreamTag tag, std::uint64_t index,
                    FeatureDist features) {
  RandomStream rng(seed, {tag, index});
  return sample_task(meta, t, rng, features);
}

std::vector<TaskBatch> sample_tasks(const MetaParams& meta, Index n, Index t, std::uint64_t seed, StreamTag tag,
                                    unsigned threads, FeatureDist features) {
  std::vector<TaskBatch> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = make_task(meta, t, seed, tag, i, features); });
  return out;
}

TaskPool sample_pool(const MetaParams& meta, const PoolSizes& sizes, std::uint64_t seed, unsigned threads,
                     FeatureDist features) {
  require(sizes.t_l1 >= 2, "light-1 tasks need t_L1 >= 2");
  require(sizes.n_l1 >= 1 && sizes.n_h >= 1 && sizes.n_l2 >= 1 && sizes.t_h >= 1 && sizes.t_l2 >= 1,
          "all pool counts must be positive");
  TaskPool pool;
  pool.sizes = sizes;
  pool.light1 = sample_tasks(meta, sizes.n_l1, sizes.t_l1, seed, StreamTag::Light1, threads, features);
  pool.heavy = sample_tasks(meta, sizes.n_h, sizes.t_h, seed, StreamTag::Heavy, threads, features);
  pool.light2 = sample_tasks(meta, sizes.n_l2, sizes.t_l2, seed, StreamTag::Light2, threads, features);
  return pool;
}

}  // namespace metalr

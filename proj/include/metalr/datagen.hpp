#pragma once

#include "metalr/model.hpp"
#include "metalr/rng.hpp"

#include <cstdint>
#include <string>

namespace metalr {

enum class PresetKind { Orthonormal, RandomUnit, LowerBound };

PresetKind parse_preset_kind(const std::string& name);
std::string to_string(PresetKind kind);

/// Recipe for ground-truth meta-parameters.
///
/// Orthonormal / RandomUnit: unit-norm regression vectors (orthonormal or
/// uniform on the sphere), noise scale `sigma`, uniform weights; then (W, s)
/// is rescaled jointly by 1/sqrt(1 + sigma^2) so that rho = 1.
/// LowerBound: w_i = (delta / sqrt 2) e_i, s_i = sigma, p_i = 1/k; rescaled
/// jointly only if rho > 1, or rejected when `rescale` is false.
struct GenPreset {
  PresetKind kind = PresetKind::Orthonormal;
  double delta = 1.0;
  double sigma = 1.0;
  bool rescale = true;
};

enum class FeatureDist { Gaussian, Rademacher };

MetaParams sample_meta_params(Index k, Index d, const GenPreset& preset, std::uint64_t seed);

/// Draws one task: z ~ multinomial(p), x ~ P_x, y = x^T w_z + s_z g.
TaskBatch sample_task(const MetaParams& meta, Index t, RandomStream& rng,
                      FeatureDist features = FeatureDist::Gaussian);

/// Task `index` of dataset `tag`; pure in (meta, t, seed, tag, index).
TaskBatch make_task(const MetaParams& meta, Index t, std::uint64_t seed, StreamTag tag, std::uint64_t index,
                    FeatureDist features = FeatureDist::Gaussian);

TaskPool sample_pool(const MetaParams& meta, const PoolSizes& sizes, std::uint64_t seed, unsigned threads = 1,
                     FeatureDist features = FeatureDist::Gaussian);

/// n tasks of one dataset, generated in parallel.
std::vector<TaskBatch> sample_tasks(const MetaParams& meta, Index n, Index t, std::uint64_t seed, StreamTag tag,
                                    unsigned threads = 1, FeatureDist features = FeatureDist::Gaussian);

}  // namespace metalr

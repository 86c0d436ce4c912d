#pragma once

#include "metalr/classify.hpp"
#include "metalr/cluster.hpp"
#include "metalr/config.hpp"
#include "metalr/datagen.hpp"
#include "metalr/eval.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace metalr {

/// A failure inside one pipeline stage; what() is "<stage>: <cause>".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using Timings = std::vector<std::pair<std::string, double>>;  // stage, seconds

struct SpectralOptions {
  Index L = 0;  // 0 picks default_batch_count
  Linkage linkage = Linkage::Average;
  unsigned threads = 1;
};

GenPreset preset_from_config(const Config& config);
PoolSizes pool_from_config(const Config& config);
SpectralOptions spectral_from_config(const Config& config, unsigned threads);
MetaParams meta_from_config(const Config& config, std::uint64_t seed);

/// Subspace from n light tasks of dataset Light1, generated on the fly.
Subspace streamed_subspace(const MetaParams& meta, Index n, Index t, std::uint64_t seed, unsigned threads);

struct ClusterStage {
  Index L = 0;
  DistanceMatrix distances;
  ClusterModel model;
};

ClusterStage cluster_heavy(const std::vector<TaskBatch>& heavy, const Subspace& U, Index k,
                           const SpectralOptions& options);

/// Every intermediate of one spectral fit on a freshly drawn pool.
struct SpectralRun {
  std::vector<TaskBatch> heavy;
  std::vector<TaskBatch> light2;
  std::optional<Subspace> subspace;
  ClusterStage cluster;
  RefineResult refined;
  Timings timings;
};

/// Draws the pool for `meta` (light-1 streamed, heavy and light-2 kept) and
/// runs subspace estimation, clustering and classification. Failures are
/// rethrown as StageError.
SpectralRun run_spectral(const MetaParams& meta, const PoolSizes& sizes, std::uint64_t seed,
                         const SpectralOptions& options);

struct RunReport {
  std::string config_text;
  std::string config_hash;
  std::uint64_t seed = 0;
  Index k = 0, d = 0, L = 0;
  double subspace_error = 0.0;
  double clustering_accuracy = 0.0;
  double classification_accuracy = 0.0;
  double estimation_error = 0.0;
  int degenerate_components = 0;
  bool p_valid = true;
  std::optional<PredictionReport> prediction;  // present when tau > 0
  Timings timings;
};

RunReport run_pipeline(const Config& config, std::uint64_t seed, unsigned threads = 1);

/// JSON form of a report; timings are omitted when `with_timings` is false
/// so that runs can be compared byte for byte.
nlohmann::json to_json(const RunReport& report, bool with_timings = true);
nlohmann::json to_json(const PredictionReport& report);

}  // namespace metalr

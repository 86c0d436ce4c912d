#include "metalr/pipeline.hpp"

#include "metalr/subspace.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>
#include <type_traits>

namespace metalr {

namespace {

template <typename Fn>
auto timed_stage(const std::string& name, Timings& timings, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings.emplace_back(name, elapsed.count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto out = fn();
      record();
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

GenPreset preset_from_config(const Config& config) {
  GenPreset preset;
  preset.kind = parse_preset_kind(config.raw("preset"));
  preset.delta = config.get_double("delta");
  preset.sigma = config.get_double("sigma");
  return preset;
}

PoolSizes pool_from_config(const Config& config) {
  PoolSizes sizes;
  sizes.n_l1 = config.get_index("n_l1");
  sizes.t_l1 = config.get_index("t_l1");
  sizes.n_h = config.get_index("n_h");
  sizes.t_h = config.get_index("t_h");
  sizes.n_l2 = config.get_index("n_l2");
  sizes.t_l2 = config.get_index("t_l2");
  return sizes;
}

SpectralOptions spectral_from_config(const Config& config, unsigned threads) {
  SpectralOptions options;
  options.L = config.get_index("L");
  options.linkage = parse_linkage(config.raw("linkage"));
  options.threads = threads;
  return options;
}

MetaParams meta_from_config(const Config& config, std::uint64_t seed) {
  return sample_meta_params(config.get_index("k"), config.get_index("d"), preset_from_config(config), seed);
}

Subspace streamed_subspace(const MetaParams& meta, Index n, Index t, std::uint64_t seed, unsigned threads) {
  require(n >= 1 && t >= 2, "subspace estimation needs n >= 1 tasks of t >= 2 examples");
  const SymMatrix M = moment_matrix_streamed(
      n, meta.dim(), [&](std::size_t i) { return make_task(meta, t, seed, StreamTag::Light1, i); }, threads);
  return top_k_eig(M, meta.components()).subspace;
}

ClusterStage cluster_heavy(const std::vector<TaskBatch>& heavy, const Subspace& U, Index k,
                           const SpectralOptions& options) {
  require(!heavy.empty(), "no heavy tasks");
  ClusterStage out;
  out.L = options.L > 0 ? options.L
                        : default_batch_count(static_cast<Index>(heavy.size()), heavy.front().size(), k);
  out.distances = pairwise_distance(heavy, U, out.L, options.threads);
  const Partition partition = agglomerate(out.distances, k, options.linkage);
  out.model = initial_estimates(heavy, partition, U);
  return out;
}

SpectralRun run_spectral(const MetaParams& meta, const PoolSizes& sizes, std::uint64_t seed,
                         const SpectralOptions& options) {
  SpectralRun run;
  const unsigned threads = options.threads;
  timed_stage("datagen", run.timings, [&] {
    run.heavy = sample_tasks(meta, sizes.n_h, sizes.t_h, seed, StreamTag::Heavy, threads);
    run.light2 = sample_tasks(meta, sizes.n_l2, sizes.t_l2, seed, StreamTag::Light2, threads);
  });
  run.subspace = timed_stage("subspace", run.timings,
                             [&] { return streamed_subspace(meta, sizes.n_l1, sizes.t_l1, seed, threads); });
  run.cluster = timed_stage("cluster", run.timings,
                            [&] { return cluster_heavy(run.heavy, *run.subspace, meta.components(), options); });
  run.refined = timed_stage("classify", run.timings,
                            [&] { return refine(run.heavy, run.light2, run.cluster.model, meta.dim(), threads); });
  return run;
}

RunReport run_pipeline(const Config& config, std::uint64_t seed, unsigned threads) {
  RunReport report;
  report.config_text = config.canonical();
  report.config_hash = config.hash();
  report.seed = seed;

  Timings setup;
  const auto [meta, sizes, options, tau, trials] = timed_stage("config", setup, [&] {
    const MetaParams m = meta_from_config(config, seed);
    return std::make_tuple(m, pool_from_config(config), spectral_from_config(config, threads),
                           config.get_index("tau"), config.get_index("trials"));
  });
  report.k = meta.components();
  report.d = meta.dim();

  SpectralRun run = run_spectral(meta, sizes, seed, options);
  report.L = run.cluster.L;
  report.timings = setup;
  report.timings.insert(report.timings.end(), run.timings.begin(), run.timings.end());

  timed_stage("eval", report.timings, [&] {
    const FittedModel& fitted = run.refined.model;
    report.subspace_error = subspace_error(*run.subspace, meta);
    const Partition& partition = run.cluster.model.assignments;
    report.clustering_accuracy = clustering_accuracy(partition, run.heavy);
    std::vector<int> heavy_labels;
    for (const auto& task : run.heavy) heavy_labels.push_back(*task.true_component);
    const auto mapping = cluster_of_label(partition.labels, heavy_labels, static_cast<int>(meta.components()));
    report.classification_accuracy = classification_accuracy(run.refined.light_assignments, run.light2, mapping);
    report.p_valid = fitted.p_valid;
    report.estimation_error =
        fitted.p_valid ? estimation_error(fitted, meta, sizes.t_l2) : std::numeric_limits<double>::infinity();
    for (const bool flag : fitted.degenerate) report.degenerate_components += flag ? 1 : 0;
  });

  if (tau > 0) {
    report.prediction = timed_stage("predict", report.timings, [&] {
      return prediction_error(run.refined.model, meta, tau, trials, seed, threads);
    });
  }
  return report;
}

nlohmann::json to_json(const PredictionReport& p) {
  return {{"train_mse_map", p.train_mse_map},     {"train_mse_bayes", p.train_mse_bayes},
          {"test_mse_map", p.test_mse_map},       {"test_mse_bayes", p.test_mse_bayes},
          {"test_mse_map_se", p.test_mse_map_se}, {"test_mse_bayes_se", p.test_mse_bayes_se},
          {"param_err_map", p.param_err_map},     {"param_err_bayes", p.param_err_bayes}};
}

nlohmann::json to_json(const RunReport& r, bool with_timings) {
  // JSON has no infinity; an unavailable error is written as null.
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json out = {
      {"version", METALR_VERSION},
      {"seed", r.seed},
      {"config_hash", r.config_hash},
      {"config", r.config_text},
      {"k", r.k},
      {"d", r.d},
      {"L", r.L},
      {"subspace_error", r.subspace_error},
      {"clustering_accuracy", r.clustering_accuracy},
      {"classification_accuracy", r.classification_accuracy},
      {"estimation_error", finite_or_null(r.estimation_error)},
      {"degenerate_components", r.degenerate_components},
      {"p_valid", r.p_valid},
  };
  if (r.prediction) out["prediction"] = to_json(*r.prediction);
  if (with_timings) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [stage, seconds] : r.timings) t[stage] = seconds;
    out["timings_s"] = t;
  }
  return out;
}

}  // namespace metalr

#include "metalr/bench.hpp"

#include "metalr/em.hpp"
#include "metalr/parallel.hpp"
#include "metalr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace metalr {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_csv(std::ostream& os, const Table& table, const std::vector<std::string>& comments) {
  for (const auto& line : comments) os << "# " << line << "\r\n";
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << "\r\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) {
    require(row.size() == table.header.size(), "CSV row width differs from header");
    write_row(row);
  }
}

nlohmann::json to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.header[i]] = row[i];
    rows.push_back(obj);
  }
  return rows;
}

std::vector<SubspaceCell> bench_subspace(const Config& config, std::uint64_t seed, unsigned threads) {
  const auto ts = config.get_index_list("t_l1");
  const auto ns = config.get_index_list("n_l1");
  const Index repeats = config.get_index("repeats");
  require(repeats >= 1, "repeats must be positive");

  std::vector<SubspaceCell> cells;
  for (const Index t : ts)
    for (const Index n : ns) cells.push_back({t, n, {}, 0.0});
  for (Index r = 0; r < repeats; ++r) {
    const std::uint64_t seed_r = derive_seed(seed, static_cast<std::uint64_t>(r));
    const MetaParams meta = meta_from_config(config, seed_r);
    for (auto& cell : cells)
      cell.errors.push_back(subspace_error(streamed_subspace(meta, cell.n, cell.t, seed_r, threads), meta));
  }
  for (auto& cell : cells) cell.median = median(cell.errors);
  return cells;
}

Table to_table(const std::vector<SubspaceCell>& cells) {
  Table table{{"t_l1", "n_l1", "repeats", "median_error", "min_error", "max_error"}, {}};
  for (const auto& c : cells) {
    const auto [lo, hi] = std::minmax_element(c.errors.begin(), c.errors.end());
    table.rows.push_back({std::to_string(c.t), std::to_string(c.n), std::to_string(c.errors.size()),
                          format_double(c.median), format_double(*lo), format_double(*hi)});
  }
  return table;
}

Index smallest_passing(Index lo, Index hi, double confidence, const std::function<double(Index)>& rate,
                       bool& censored) {
  require(lo <= hi, "empty search range");
  censored = rate(hi) < confidence;
  if (censored) return hi;
  while (lo < hi) {
    const Index mid = lo + (hi - lo) / 2;
    if (rate(mid) >= confidence)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

namespace {

constexpr double kTargetAccuracy = 0.99;

std::pair<Index, Index> search_range(const Config& config, const std::string& key) {
  const auto values = config.get_index_list(key);
  require(values.size() <= 2, "'" + key + "' takes one value or a 'lo, hi' pair");
  const Index lo = values.size() == 2 ? values[0] : 2;
  const Index hi = values.back();
  require(lo >= 2 && lo <= hi, "'" + key + "' range must satisfy 2 <= lo <= hi");
  return {lo, hi};
}

std::vector<int> labels_of(const std::vector<TaskBatch>& tasks) {
  std::vector<int> labels;
  labels.reserve(tasks.size());
  for (const auto& task : tasks) labels.push_back(*task.true_component);
  return labels;
}

// Per-trial state shared by every t the search visits.
struct Trial {
  MetaParams meta;
  std::optional<Subspace> U;
  std::optional<ClusterModel> clusters;
  std::vector<int> cluster_of;
};

}  // namespace

TminReport bench_tmin(TminStage stage, const Config& config, std::uint64_t seed, unsigned threads) {
  const Index trials = config.get_index("trials");
  const double confidence = config.get_double("confidence");
  require(trials >= 1, "trials must be positive");
  require(confidence > 0.0 && confidence <= 1.0, "confidence must lie in (0, 1]");
  const auto [lo, hi] = search_range(config, stage == TminStage::Cluster ? "t_h" : "t_l2");
  const Index n_l1 = config.get_index("n_l1"), t_l1 = config.get_index("t_l1");
  const Index n_h = config.get_index("n_h"), n_l2 = config.get_index("n_l2");
  const SpectralOptions options = spectral_from_config(config, threads);

  std::vector<Trial> state;
  for (Index r = 0; r < trials; ++r) {
    const std::uint64_t seed_r = derive_seed(seed, static_cast<std::uint64_t>(r));
    Trial trial{meta_from_config(config, seed_r), std::nullopt, std::nullopt, {}};
    trial.U = streamed_subspace(trial.meta, n_l1, t_l1, seed_r, threads);
    if (stage == TminStage::Classify) {
      const auto heavy = sample_tasks(trial.meta, n_h, config.get_index("t_h"), seed_r, StreamTag::Heavy, threads);
      const ClusterStage cs = cluster_heavy(heavy, *trial.U, trial.meta.components(), options);
      trial.cluster_of = cluster_of_label(cs.model.assignments.labels, labels_of(heavy),
                                          static_cast<int>(trial.meta.components()));
      trial.clusters = cs.model;
    }
    state.push_back(std::move(trial));
  }

  TminReport report;
  report.stage = stage;
  report.trials = trials;
  auto accuracy = [&](std::size_t r, Index t) {
    const Trial& trial = state[r];
    const std::uint64_t seed_rt = derive_seed(derive_seed(seed, r), 1, static_cast<std::uint64_t>(t));
    const Index k = trial.meta.components();
    if (stage == TminStage::Cluster) {
      const auto heavy = sample_tasks(trial.meta, n_h, t, seed_rt, StreamTag::Heavy, threads);
      SpectralOptions local = options;
      // Each batch needs two non-empty blocks.
      local.L = std::min(options.L > 0 ? options.L : default_batch_count(n_h, t, k), std::max<Index>(1, t / 2));
      const ClusterStage cs = cluster_heavy(heavy, *trial.U, k, local);
      return clustering_accuracy(cs.model.assignments, heavy);
    }
    const auto light = sample_tasks(trial.meta, n_l2, t, seed_rt, StreamTag::Light2, threads);
    std::vector<int> assigned(light.size());
    parallel_for(light.size(), threads, [&](std::size_t i) { assigned[i] = classify_task(light[i], *trial.clusters); });
    return classification_accuracy(assigned, light, trial.cluster_of);
  };
  auto rate = [&](Index t) {
    const auto it = report.success_rate.find(t);
    if (it != report.success_rate.end()) return it->second;
    Index passed = 0;
    for (std::size_t r = 0; r < state.size(); ++r) passed += accuracy(r, t) >= kTargetAccuracy ? 1 : 0;
    const double value = static_cast<double>(passed) / static_cast<double>(trials);
    report.success_rate[t] = value;
    return value;
  };

  for (const double c : {confidence, 0.5}) {
    TminResult result;
    result.confidence = c;
    result.t_min = smallest_passing(lo, hi, c, rate, result.censored);
    report.results.push_back(result);
  }
  return report;
}

Table to_table(const TminReport& report) {
  Table table{{"stage", "confidence", "t_min", "censored", "trials"}, {}};
  const std::string stage = report.stage == TminStage::Cluster ? "cluster" : "classify";
  for (const auto& r : report.results)
    table.rows.push_back({stage, format_double(r.confidence), std::to_string(r.t_min), r.censored ? "1" : "0",
                          std::to_string(report.trials)});
  return table;
}

std::vector<EmCompareRow> bench_em(const Config& config, std::uint64_t seed, unsigned threads) {
  const Index repeats = config.get_index("repeats");
  const auto grid = config.get_double_list("gamma2_grid");
  const PoolSizes sizes = pool_from_config(config);
  const SpectralOptions options = spectral_from_config(config, threads);
  EmOptions em_options;
  em_options.max_iters = static_cast<int>(config.get_index("em_max_iters"));
  em_options.tol = config.get_double("em_tol");
  em_options.threads = threads;

  std::vector<EmCompareRow> rows;
  for (Index r = 0; r < repeats; ++r) {
    const std::uint64_t seed_r = derive_seed(seed, static_cast<std::uint64_t>(r));
    const MetaParams meta = meta_from_config(config, seed_r);
    const SpectralRun run = run_spectral(meta, sizes, seed_r, options);
    const double spectral = run.refined.model.p_valid ? estimation_error(run.refined.model, meta, sizes.t_l2)
                                                      : std::numeric_limits<double>::infinity();
    // EM sees the heavy and light-2 tasks; the light-1 tasks only feed the
    // subspace and would dominate its cost.
    std::vector<TaskBatch> tasks = run.heavy;
    tasks.insert(tasks.end(), run.light2.begin(), run.light2.end());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const FittedModel init = em_init_perturbed(meta, grid[g], derive_seed(seed_r, 3, g));
      const EmResult em = em_fit(tasks, init, em_options);
      EmCompareRow row;
      row.repeat = r;
      row.gamma2 = grid[g];
      row.spectral_error = spectral;
      row.em_error = estimation_error(em.model, meta, sizes.t_l2);
      row.em_iterations = em.iterations;
      row.em_converged = em.converged;
      row.em_collapsed = em.collapsed;
      rows.push_back(row);
    }
  }
  return rows;
}

Table to_table(const std::vector<EmCompareRow>& rows) {
  Table table{{"repeat", "gamma2", "spectral_error", "em_error", "em_iterations", "em_converged", "em_collapsed"},
              {}};
  for (const auto& r : rows)
    table.rows.push_back({std::to_string(r.repeat), format_double(r.gamma2), format_double(r.spectral_error),
                          format_double(r.em_error), std::to_string(r.em_iterations), r.em_converged ? "1" : "0",
                          r.em_collapsed ? "1" : "0"});
  return table;
}

}  // namespace metalr

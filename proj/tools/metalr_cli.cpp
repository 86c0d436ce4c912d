// Command-line front end: data generation, the full pipeline and the
// benchmark sweeps. Results go to --out (stdout by default) as CSV or JSON.

#include "metalr/bench.hpp"
#include "metalr/pipeline.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

namespace {

using namespace metalr;

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  std::string format;  // empty until a subcommand fills in its default
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Configuration file (key = value with [sections])");
  cmd->add_option("--seed", common.seed, "Master seed");
  cmd->add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)");
  cmd->add_option("--out", common.out, "Output file (default: stdout)");
  cmd->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

Config load_config(const Common& common) {
  return common.config_path.empty() ? Config{} : Config::load(common.config_path);
}

unsigned resolve_threads(unsigned threads) {
  return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

// Opens --out, or wraps stdout.
std::unique_ptr<std::ostream, void (*)(std::ostream*)> open_out(const std::string& path) {
  if (path.empty()) return {&std::cout, [](std::ostream*) {}};
  auto* file = new std::ofstream(path, std::ios::binary);
  if (!*file) {
    delete file;
    throw std::runtime_error("cannot open output file: " + path);
  }
  return {file, [](std::ostream* p) { delete p; }};
}

std::vector<std::string> provenance(const Config& config, const Common& common) {
  return {"metalr " + std::string(METALR_VERSION), "seed=" + std::to_string(common.seed),
          "config_hash=" + config.hash()};
}

void emit(const Table& table, const Config& config, const Common& common) {
  auto os = open_out(common.out);
  if (common.format == "json") {
    nlohmann::json doc = {{"version", METALR_VERSION},
                          {"seed", common.seed},
                          {"config_hash", config.hash()},
                          {"rows", to_json(table)}};
    *os << doc.dump(2) << '\n';
  } else {
    write_csv(*os, table, provenance(config, common));
  }
}

void write_task_rows(std::ostream& os, const std::string& dataset, std::uint64_t index, const TaskBatch& task) {
  for (Index j = 0; j < task.size(); ++j) {
    os << dataset << ',' << index << ',' << *task.true_component << ',' << j << ',' << format_double(task.y(j));
    for (Index c = 0; c < task.dim(); ++c) os << ',' << format_double(task.X(j, c));
    os << "\r\n";
  }
}

void run_gen(const Common& common) {
  const Config config = load_config(common);
  const MetaParams meta = meta_from_config(config, common.seed);
  const PoolSizes sizes = pool_from_config(config);
  const struct {
    const char* name;
    StreamTag tag;
    Index n, t;
  } datasets[] = {{"light1", StreamTag::Light1, sizes.n_l1, sizes.t_l1},
                  {"heavy", StreamTag::Heavy, sizes.n_h, sizes.t_h},
                  {"light2", StreamTag::Light2, sizes.n_l2, sizes.t_l2}};
  auto os = open_out(common.out);

  if (common.format == "json") {
    auto matrix_json = [](const Matrix& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (Index i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
      return rows;
    };
    nlohmann::json doc = {{"version", METALR_VERSION}, {"seed", common.seed}, {"config_hash", config.hash()}};
    doc["meta"] = {{"W", matrix_json(meta.W)},
                   {"s", std::vector<double>(meta.s.begin(), meta.s.end())},
                   {"p", std::vector<double>(meta.p.begin(), meta.p.end())}};
    for (const auto& ds : datasets) {
      nlohmann::json tasks = nlohmann::json::array();
      for (Index i = 0; i < ds.n; ++i) {
        const TaskBatch task = make_task(meta, ds.t, common.seed, ds.tag, static_cast<std::uint64_t>(i));
        tasks.push_back({{"component", *task.true_component},
                         {"X", matrix_json(task.X)},
                         {"y", std::vector<double>(task.y.begin(), task.y.end())}});
      }
      doc[ds.name] = std::move(tasks);
    }
    *os << doc.dump() << '\n';
    return;
  }

  for (const auto& line : provenance(config, common)) *os << "# " << line << "\r\n";
  *os << "dataset,task,component,example,y";
  for (Index c = 0; c < meta.dim(); ++c) *os << ",x" << c;
  *os << "\r\n";
  // Tasks are generated one at a time, so light-1 never sits in memory.
  for (const auto& ds : datasets)
    for (Index i = 0; i < ds.n; ++i)
      write_task_rows(*os, ds.name, static_cast<std::uint64_t>(i),
                      make_task(meta, ds.t, common.seed, ds.tag, static_cast<std::uint64_t>(i)));
}

void run_pipeline_cmd(const Common& common) {
  const Config config = load_config(common);
  const RunReport report = run_pipeline(config, common.seed, resolve_threads(common.threads));
  if (common.format == "json") {
    auto os = open_out(common.out);
    *os << to_json(report).dump(2) << '\n';
    return;
  }
  Table table{{"metric", "value"}, {}};
  for (const auto& [key, value] : to_json(report).items()) {
    if (key == "config") continue;
    if (value.is_object()) {
      for (const auto& [sub, v] : value.items())
        table.rows.push_back({key + "." + sub, v.is_number_float() ? format_double(v.get<double>()) : v.dump()});
    } else {
      table.rows.push_back({key, value.is_number_float() ? format_double(value.get<double>())
                                 : value.is_string()     ? value.get<std::string>()
                                                         : value.dump()});
    }
  }
  emit(table, config, common);
}

void run_predict(const Common& common) {
  const Config config = load_config(common);
  const Index tau = config.get_index("tau");
  if (tau < 1) throw ConfigError("predict needs tau >= 1 in [pipeline]");
  const unsigned threads = resolve_threads(common.threads);
  const MetaParams meta = meta_from_config(config, common.seed);
  const SpectralRun run =
      run_spectral(meta, pool_from_config(config), common.seed, spectral_from_config(config, threads));
  const Index trials = config.get_index("trials");

  Table table{{"model", "tau", "trials", "train_mse_map", "train_mse_bayes", "test_mse_map", "test_mse_bayes",
               "param_err_map", "param_err_bayes"},
              {}};
  const std::pair<const char*, FittedModel> models[] = {{"spectral", run.refined.model},
                                                        {"oracle", FittedModel::from_truth(meta)}};
  for (const auto& [name, model] : models) {
    const PredictionReport p = prediction_error(model, meta, tau, trials, common.seed, threads);
    table.rows.push_back({name, std::to_string(tau), std::to_string(trials), format_double(p.train_mse_map),
                          format_double(p.train_mse_bayes), format_double(p.test_mse_map),
                          format_double(p.test_mse_bayes), format_double(p.param_err_map),
                          format_double(p.param_err_bayes)});
  }
  emit(table, config, common);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral meta-learning for mixed linear regression"};
  app.set_version_flag("--version", std::string(METALR_VERSION));
  app.require_subcommand(1);

  Common common;
  std::function<void()> action;
  auto add = [&](const std::string& name, const std::string& help, const std::string& format,
                 std::function<void()> fn) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    cmd->callback([&common, &action, fn, format] {
      if (common.format.empty()) common.format = format;
      action = fn;
    });
  };

  add("gen", "Sample a task pool and write it out", "csv", [&] { run_gen(common); });
  add("pipeline", "Run subspace, clustering and classification and report the metrics", "json",
      [&] { run_pipeline_cmd(common); });
  add("bench-subspace", "Subspace error over the t_l1 x n_l1 grid", "csv", [&] {
    const Config config = load_config(common);
    emit(to_table(bench_subspace(config, common.seed, resolve_threads(common.threads))), config, common);
  });
  add("bench-tmin-cluster", "Smallest heavy-task length that clusters correctly", "csv", [&] {
    const Config config = load_config(common);
    emit(to_table(bench_tmin(TminStage::Cluster, config, common.seed, resolve_threads(common.threads))), config,
         common);
  });
  add("bench-tmin-classify", "Smallest light-task length that classifies correctly", "csv", [&] {
    const Config config = load_config(common);
    emit(to_table(bench_tmin(TminStage::Classify, config, common.seed, resolve_threads(common.threads))), config,
         common);
  });
  add("bench-em", "EM from perturbed truth against the spectral estimate", "csv", [&] {
    const Config config = load_config(common);
    emit(to_table(bench_em(config, common.seed, resolve_threads(common.threads))), config, common);
  });
  add("predict", "Prediction error of the fitted and the true prior", "csv", [&] { run_predict(common); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

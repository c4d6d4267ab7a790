// Apache License, Version 2.0, refer to LICENSE.txt
//
// Subcommands: sample, fit, density, draw, bench, ablate. Every flag can
// also be set through the environment with a ROME_ prefix (ROME_DIST, ...).

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rome/bench.hpp"
#include "rome/csv.hpp"
#include "rome/distributions.hpp"
#include "rome/estimators.hpp"
#include "rome/metrics.hpp"
#include "rome/model_io.hpp"

namespace {

using namespace rome;

estimators::FitConfig parse_config_arg(const std::string& arg) {
  if (arg.empty()) return estimators::FitConfig{};
  if (arg.front() == '{') return model_io::fit_config_from_json(arg);
  std::ifstream in(arg);
  if (!in) throw ConfigError("cannot open config file: " + arg);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_io::fit_config_from_json(buf.str());
}

std::vector<bench::MetricKind> parse_metric_list(const std::string& list) {
  std::vector<bench::MetricKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(bench::metric_kind_by_name(item));
  }
  if (out.empty()) throw ConfigError("empty metric list");
  return out;
}

void write_density_csv(const std::string& path, const Vector& values) {
  std::ostringstream out;
  out << "log_density\n";
  for (Index i = 0; i < values.size(); ++i) {
    out << csv::format_real(values(i)) << '\n';
  }
  csv::atomic_write_text(path, out.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROME density estimation toolkit"};
  app.require_subcommand(1);

  std::string dist, out_path, input_path, config_arg, model_path, query_path;
  std::string metrics_list = "jsd,wasserstein,loglik";
  std::string grid = "unique";
  std::string preset;
  std::uint64_t seed = 0;
  Index n = 3000;
  int reps = 100;
  int threads = 1;

  auto* cmd_sample = app.add_subcommand("sample", "draw from a benchmark distribution");
  cmd_sample->add_option("--dist", dist, "distribution name")->required()->envname("ROME_DIST");
  cmd_sample->add_option("--n", n, "number of samples")->envname("ROME_N");
  cmd_sample->add_option("--seed", seed, "rng seed")->envname("ROME_SEED");
  cmd_sample->add_option("--out", out_path, "output csv")->required()->envname("ROME_OUT");

  auto* cmd_fit = app.add_subcommand("fit", "fit a model to a csv dataset");
  cmd_fit->add_option("--input", input_path, "input csv")->required()->envname("ROME_INPUT");
  cmd_fit->add_option("--config", config_arg, "fit config json (path or inline)")->envname("ROME_CONFIG");
  cmd_fit->add_option("--out", out_path, "output model json")->required()->envname("ROME_OUT");

  auto* cmd_density = app.add_subcommand("density", "evaluate log-density at query points");
  cmd_density->add_option("--model", model_path, "model json")->required()->envname("ROME_MODEL");
  cmd_density->add_option("--query", query_path, "query csv")->required()->envname("ROME_QUERY");
  cmd_density->add_option("--out", out_path, "output csv")->required()->envname("ROME_OUT");

  auto* cmd_draw = app.add_subcommand("draw", "sample from a fitted model");
  cmd_draw->add_option("--model", model_path, "model json")->required()->envname("ROME_MODEL");
  cmd_draw->add_option("--n", n, "number of samples")->envname("ROME_N");
  cmd_draw->add_option("--seed", seed, "rng seed")->envname("ROME_SEED");
  cmd_draw->add_option("--out", out_path, "output csv")->required()->envname("ROME_OUT");

  auto* cmd_bench = app.add_subcommand("bench", "repeated sample/fit/evaluate protocol");
  cmd_bench->add_option("--dist", dist, "distribution name")->required()->envname("ROME_DIST");
  auto* bench_n = cmd_bench->add_option("--n", n, "samples per set")->envname("ROME_N");
  auto* bench_reps = cmd_bench->add_option("--reps", reps, "repetitions")->envname("ROME_REPS");
  cmd_bench->add_option("--seed", seed, "base seed")->envname("ROME_SEED");
  cmd_bench->add_option("--metrics", metrics_list, "comma list: jsd,jsd_true,wasserstein,loglik")->envname("ROME_METRICS");
  cmd_bench->add_option("--config", config_arg, "fit config json (path or inline)")->envname("ROME_CONFIG");
  cmd_bench->add_option("--preset", preset, "desk (n=1000, reps=20) or full (n=3000, reps=100)")->envname("ROME_PRESET");
  cmd_bench->add_option("--threads", threads, "parallel repetitions")->envname("ROME_THREADS");
  cmd_bench->add_option("--out", out_path, "output csv")->required()->envname("ROME_OUT");

  auto* cmd_ablate = app.add_subcommand("ablate", "run an ablation grid");
  cmd_ablate->add_option("--dist", dist, "distribution name")->required()->envname("ROME_DIST");
  cmd_ablate->add_option("--grid", grid, "unique or full")->envname("ROME_GRID");
  auto* ablate_n = cmd_ablate->add_option("--n", n, "samples per set")->envname("ROME_N");
  auto* ablate_reps = cmd_ablate->add_option("--reps", reps, "repetitions")->envname("ROME_REPS");
  cmd_ablate->add_option("--seed", seed, "base seed")->envname("ROME_SEED");
  cmd_ablate->add_option("--metrics", metrics_list, "comma list: jsd,jsd_true,wasserstein,loglik")->envname("ROME_METRICS");
  cmd_ablate->add_option("--preset", preset, "desk (n=1000, reps=20) or full (n=3000, reps=100)")->envname("ROME_PRESET");
  cmd_ablate->add_option("--threads", threads, "parallel repetitions")->envname("ROME_THREADS");
  cmd_ablate->add_option("--out", out_path, "output csv")->required()->envname("ROME_OUT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_sample->parsed()) {
      const auto spec = distributions::DistributionSpec::by_name(dist);
      csv::write_dataset(out_path, distributions::sample(spec, n, seed));
    } else if (cmd_fit->parsed()) {
      const Dataset data = csv::read_dataset(input_path);
      const auto model = estimators::fit(data, parse_config_arg(config_arg));
      model_io::save_model(out_path, model);
    } else if (cmd_density->parsed()) {
      const auto model = model_io::load_model(model_path);
      const Dataset queries = csv::read_dataset(query_path);
      write_density_csv(out_path,
                        estimators::log_density_batch(model, queries.values));
    } else if (cmd_draw->parsed()) {
      const auto model = model_io::load_model(model_path);
      csv::write_dataset(out_path, estimators::sample_model(model, n, seed));
    } else {
      bench::ExperimentPlan plan;
      plan.distribution = dist;
      plan.base_seed = seed;
      plan.threads = threads;
      plan.metrics = parse_metric_list(metrics_list);
      if (preset == "desk") {
        plan.n = 1000;
        plan.reps = 20;
      } else if (preset == "full") {
        plan.n = 3000;
        plan.reps = 100;
      } else if (!preset.empty()) {
        throw ConfigError("unknown preset: " + preset);
      }
      const bool ablate = cmd_ablate->parsed();
      if ((ablate ? ablate_n : bench_n)->count() > 0 || preset.empty()) {
        plan.n = n;
      }
      if ((ablate ? ablate_reps : bench_reps)->count() > 0 || preset.empty()) {
        plan.reps = reps;
      }
      if (ablate) {
        plan.configs = bench::ablation_grid(grid);
      } else {
        plan.configs = {parse_config_arg(config_arg)};
      }
      bench::write_reports_csv(out_path, bench::run_plan(plan));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

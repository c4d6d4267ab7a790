// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/bench.hpp"

#include <atomic>
#include <future>
#include <iostream>
#include <sstream>

#include "rome/csv.hpp"
#include "rome/distributions.hpp"
#include "rome/random.hpp"

namespace rome::bench {

using distributions::DistributionSpec;
using estimators::Downstream;
using estimators::FitConfig;

std::string metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::jsd: return "jsd";
    case MetricKind::jsd_true: return "jsd_true";
    case MetricKind::wasserstein: return "wasserstein_indicator";
    case MetricKind::loglik: return "avg_log_likelihood";
  }
  throw ConfigError("unknown metric kind");
}

MetricKind metric_kind_by_name(const std::string& name) {
  if (name == "jsd") return MetricKind::jsd;
  if (name == "jsd_true") return MetricKind::jsd_true;
  if (name == "wasserstein" || name == "wasserstein_indicator") {
    return MetricKind::wasserstein;
  }
  if (name == "loglik" || name == "avg_log_likelihood") {
    return MetricKind::loglik;
  }
  throw ConfigError("unknown metric: " + name);
}

namespace {

bool metric_applicable(const ExperimentPlan& plan, const FitConfig& config,
                       MetricKind metric) {
  if (metric == MetricKind::wasserstein &&
      config.downstream == Downstream::knn) {
    return false;  // knn models cannot generate samples
  }
  if (metric == MetricKind::jsd_true) {
    return distributions::has_true_log_density(
        DistributionSpec::by_name(plan.distribution));
  }
  return true;
}

void validate_plan(const ExperimentPlan& plan) {
  if (plan.reps < 1) throw ConfigError("reps must be at least 1");
  if (plan.n < 2) throw ConfigError("n must be at least 2");
  if (plan.configs.empty()) throw ConfigError("plan has no configs");
  if (plan.metrics.empty()) throw ConfigError("plan has no metrics");
  DistributionSpec::by_name(plan.distribution);  // throws on unknown name
}

bool wants(const ExperimentPlan& plan, MetricKind kind) {
  for (MetricKind m : plan.metrics) {
    if (m == kind) return true;
  }
  return false;
}

}  // namespace

RepResult run_rep(const ExperimentPlan& plan, int rep_index) {
  validate_plan(plan);
  const auto spec = DistributionSpec::by_name(plan.distribution);
  const auto rep = static_cast<std::uint64_t>(rep_index);

  const Dataset x1 = distributions::sample(
      spec, plan.n, derive_seed({plan.base_seed, rep, kRoleX1}));
  const Dataset x2 =
      plan.debug_identical_sets
          ? x1
          : distributions::sample(spec, plan.n,
                                  derive_seed({plan.base_seed, rep, kRoleX2}));
  Dataset xtrue;
  if (wants(plan, MetricKind::jsd_true) &&
      distributions::has_true_log_density(spec)) {
    xtrue = distributions::sample(
        spec, plan.n, derive_seed({plan.base_seed, rep, kRoleXTrue}));
  }

  RepResult result;
  result.values.resize(plan.configs.size());
  for (std::size_t ci = 0; ci < plan.configs.size(); ++ci) {
    const FitConfig& config = plan.configs[ci];
    result.values[ci].assign(plan.metrics.size(), std::nullopt);
    try {
      const auto model1 = estimators::fit(x1, config);
      const auto p1 = metrics::log_density_fn(model1);

      std::optional<estimators::RomeModel> model2;
      if (wants(plan, MetricKind::jsd)) {
        model2 = estimators::fit(x2, config);
      }

      for (std::size_t mi = 0; mi < plan.metrics.size(); ++mi) {
        const MetricKind metric = plan.metrics[mi];
        if (!metric_applicable(plan, config, metric)) continue;
        switch (metric) {
          case MetricKind::jsd:
            result.values[ci][mi] =
                metrics::jsd(p1, metrics::log_density_fn(*model2), x1.values,
                             x2.values);
            break;
          case MetricKind::jsd_true:
            result.values[ci][mi] =
                metrics::jsd_true(p1, spec, x1.values, xtrue.values);
            break;
          case MetricKind::wasserstein: {
            const Dataset xhat = estimators::sample_model(
                model1, plan.n, derive_seed({plan.base_seed, rep, kRoleXHat}));
            result.values[ci][mi] = metrics::wasserstein_indicator(
                x1.values, x2.values, xhat.values);
            break;
          }
          case MetricKind::loglik:
            result.values[ci][mi] = metrics::avg_log_likelihood(p1, x2.values);
            break;
        }
      }
    } catch (const std::exception& e) {
      std::ostringstream note;
      note << "rep " << rep_index << " config " << config.name()
           << " failed: " << e.what();
      result.notes.push_back(note.str());
    }
  }
  return result;
}

std::vector<metrics::MetricReport> run_plan(const ExperimentPlan& plan) {
  validate_plan(plan);

  std::vector<RepResult> reps(static_cast<std::size_t>(plan.reps));
  const int threads = std::max(1, plan.threads);
  if (threads == 1) {
    for (int r = 0; r < plan.reps; ++r) reps[static_cast<std::size_t>(r)] =
        run_rep(plan, r);
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      workers.push_back(std::async(std::launch::async, [&]() {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= plan.reps) return;
          reps[static_cast<std::size_t>(r)] = run_rep(plan, r);
        }
      }));
    }
    for (auto& w : workers) w.get();
  }

  for (const auto& rep : reps) {
    for (const auto& note : rep.notes) std::cerr << note << '\n';
  }

  std::vector<metrics::MetricReport> reports;
  for (std::size_t ci = 0; ci < plan.configs.size(); ++ci) {
    for (std::size_t mi = 0; mi < plan.metrics.size(); ++mi) {
      if (!metric_applicable(plan, plan.configs[ci], plan.metrics[mi])) {
        continue;
      }
      std::vector<Real> values;
      for (const auto& rep : reps) {
        if (rep.values[ci][mi].has_value()) {
          values.push_back(*rep.values[ci][mi]);
        }
      }
      reports.push_back(metrics::make_report(plan.distribution,
                                    plan.configs[ci].name(),
                                    metric_kind_name(plan.metrics[mi]),
                                    std::move(values)));
    }
  }
  return reports;
}

std::string reports_to_csv(const std::vector<metrics::MetricReport>& reports) {
  std::ostringstream out;
  out << "distribution,estimator_config,metric,mean,std,reps\n";
  for (const auto& r : reports) {
    out << r.distribution << ',' << r.config << ',' << r.metric << ','
        << csv::format_real(r.mean) << ',' << csv::format_real(r.stddev) << ','
        << r.reps << '\n';
  }
  return out.str();
}

void write_reports_csv(const std::string& path,
                       const std::vector<metrics::MetricReport>& reports) {
  csv::atomic_write_text(path, reports_to_csv(reports));
}

std::vector<FitConfig> ablation_grid(const std::string& grid_name) {
  std::vector<FitConfig> out;
  auto add = [&out](estimators::Clustering clustering, bool decorr, bool norm,
                    Downstream down) {
    FitConfig c;
    c.clustering = clustering;
    c.decorrelate = decorr;
    c.normalize = norm;
    c.downstream = down;
    out.push_back(c);
  };

  const bool full = grid_name == "full";
  if (!full && grid_name != "unique") {
    throw ConfigError("unknown ablation grid: " + grid_name);
  }
  for (auto clustering :
       {estimators::Clustering::silhouette, estimators::Clustering::none}) {
    if (full) {
      for (bool decorr : {true, false}) {
        for (bool norm : {true, false}) {
          for (auto down : {Downstream::kde, Downstream::gmm, Downstream::knn}) {
            add(clustering, decorr, norm, down);
          }
        }
      }
    } else {
      // unique columns: kde/knn x {decorrelated, plain} under normalization,
      // kde/knn without normalization, and one gmm column (gmm is invariant
      // to the linear transform)
      add(clustering, true, true, Downstream::kde);
      add(clustering, false, true, Downstream::kde);
      add(clustering, false, false, Downstream::kde);
      add(clustering, true, true, Downstream::knn);
      add(clustering, false, true, Downstream::knn);
      add(clustering, false, false, Downstream::knn);
      add(clustering, false, false, Downstream::gmm);
    }
  }
  return out;
}

}  // namespace rome::bench

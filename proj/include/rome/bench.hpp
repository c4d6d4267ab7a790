// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rome/estimators.hpp"
#include "rome/metrics.hpp"

namespace rome::bench {

enum class MetricKind { jsd, jsd_true, wasserstein, loglik };

std::string metric_kind_name(MetricKind kind);
MetricKind metric_kind_by_name(const std::string& name);

/// Role tags for per-repetition seed derivation.
enum SeedRole : std::uint64_t {
  kRoleX1 = 1,
  kRoleX2 = 2,
  kRoleXTrue = 3,
  kRoleXHat = 4,
};

struct ExperimentPlan {
  std::string distribution;
  Index n = 3000;
  int reps = 100;
  std::uint64_t base_seed = 0;
  std::vector<estimators::FitConfig> configs;
  std::vector<MetricKind> metrics;
  int threads = 1;
  /// Debug switch: reuse X1 as X2, so self-comparison metrics hit their
  /// identities (jsd = 0).
  bool debug_identical_sets = false;
};

/// values[config][metric]; nullopt marks a value this (config, metric) pair
/// could not produce, with the reason in `notes`.
struct RepResult {
  std::vector<std::vector<std::optional<Real>>> values;
  std::vector<std::string> notes;
};

RepResult run_rep(const ExperimentPlan& plan, int rep_index);

std::vector<metrics::MetricReport> run_plan(const ExperimentPlan& plan);

std::string reports_to_csv(const std::vector<metrics::MetricReport>& reports);
void write_reports_csv(const std::string& path,
                       const std::vector<metrics::MetricReport>& reports);

/// Ablation configurations: clustering rows {silhouette, none} crossed with
/// the estimator columns. "unique" drops the configurations that are
/// redundant by invariance (kde/knn ignore rotation without normalization,
/// gmm ignores the whole linear transform); "full" keeps all 24.
std::vector<estimators::FitConfig> ablation_grid(const std::string& grid_name);

}  // namespace rome::bench

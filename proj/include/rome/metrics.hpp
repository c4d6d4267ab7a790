// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rome/distributions.hpp"
#include "rome/estimators.hpp"
#include "rome/types.hpp"

namespace rome::metrics {

/// Batch log-density oracle: P x M queries in, P log densities out.
using LogDensityFn = std::function<Vector(const Matrix&)>;

LogDensityFn log_density_fn(const estimators::RomeModel& model);
LogDensityFn true_log_density_fn(const distributions::DistributionSpec& spec);

/// Sample-based Jensen-Shannon divergence over X1 union X2, normalized to
/// [0, 1]; points where both densities vanish contribute the x ln x limit 0.
Real jsd(const LogDensityFn& p1, const LogDensityFn& p2, const Matrix& x1,
         const Matrix& x2);

/// Same formula with p2 replaced by the exact density of `spec`, evaluated
/// over X1 union Xtrue.
Real jsd_true(const LogDensityFn& p1,
              const distributions::DistributionSpec& spec, const Matrix& x1,
              const Matrix& xtrue);

/// Exact empirical 1-Wasserstein distance between equal-size point sets under
/// Euclidean cost (mean matched distance). Sets larger than 1024 points are
/// subsampled to 1024 with content-derived seeds, averaged over 4 draws.
Real emd(const Matrix& x, const Matrix& y);

/// (W(X1, Xhat1) - W(X1, X2)) / W(X1, X2)
Real wasserstein_indicator(const Matrix& x1, const Matrix& x2,
                           const Matrix& xhat1);

Real avg_log_likelihood(const LogDensityFn& p1, const Matrix& x2);

struct FactorTest {
  Real factor = 1;   // mean of exp(L_A,i - L_B,i)
  Real p_value = 1;  // one-sided paired t-test of factor > 1
};

FactorTest likelihood_factor(const std::vector<Real>& loglik_a,
                             const std::vector<Real>& loglik_b);

/// Min-cost perfect matching on a square cost matrix (shortest augmenting
/// path with dual potentials, O(n^3)); returns the column matched to each row.
std::vector<int> solve_assignment(const Matrix& cost);

struct MetricReport {
  std::string distribution;
  std::string config;
  std::string metric;
  std::vector<Real> per_rep;
  Real mean = 0;
  Real stddev = 0;  // sample std over reps, 0 when reps < 2
  int reps = 0;
};

MetricReport make_report(std::string distribution, std::string config,
                         std::string metric, std::vector<Real> per_rep);

}  // namespace rome::metrics

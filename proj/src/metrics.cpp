// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "rome/numeric.hpp"
#include "rome/random.hpp"

namespace rome::metrics {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kLn2 = 0.69314718055994530942;
constexpr Index kMaxExactEmd = 1024;
constexpr int kEmdSubsampleDraws = 4;
}  // namespace

LogDensityFn log_density_fn(const estimators::RomeModel& model) {
  return [&model](const Matrix& queries) {
    return estimators::log_density_batch(model, queries);
  };
}

LogDensityFn true_log_density_fn(const distributions::DistributionSpec& spec) {
  if (!distributions::has_true_log_density(spec)) {
    throw UnsupportedError("no closed-form density for " + spec.name());
  }
  return [spec](const Matrix& queries) {
    Vector out(queries.rows());
    for (Index i = 0; i < queries.rows(); ++i) {
      out(i) = *distributions::true_log_density(spec, queries.row(i));
    }
    return out;
  };
}

namespace {

// h_i = p_i/(p1+p2) * ln(2 p_i/(p1+p2)), in log space, with the x ln x -> 0
// limit at vanishing densities.
Real jsd_term(Real li, Real l1, Real l2) {
  if (li == -kInf) return 0.0;
  if (li == kInf) {
    // an infinite density dominates unless the other side is infinite too
    const Real lo = (li == l1) ? l2 : l1;
    return lo == kInf ? 0.0 : kLn2;
  }
  const Real s = log_add_exp(l1, l2);
  if (s == kInf) return 0.0;
  const Real r = li - s;
  return std::exp(r) * (kLn2 + r);
}

Real jsd_over_points(const Vector& l1, const Vector& l2, Index n_per_set) {
  Real total = 0;
  Index dead_points = 0;
  for (Index i = 0; i < l1.size(); ++i) {
    if (l1(i) == -kInf && l2(i) == -kInf) {
      ++dead_points;
      continue;
    }
    // equal densities contribute ln(1) = 0 exactly
    if (l1(i) == l2(i)) continue;
    total += jsd_term(l1(i), l1(i), l2(i)) + jsd_term(l2(i), l1(i), l2(i));
  }
  if (dead_points > 0) {
    std::cerr << "jsd: " << dead_points
              << " point(s) had zero density under both models\n";
  }
  return total / (2.0 * static_cast<Real>(n_per_set) * kLn2);
}

}  // namespace

Real jsd(const LogDensityFn& p1, const LogDensityFn& p2, const Matrix& x1,
         const Matrix& x2) {
  if (x1.rows() != x2.rows() || x1.cols() != x2.cols()) {
    throw ShapeError("jsd needs equal-size sample sets");
  }
  Matrix joined(x1.rows() + x2.rows(), x1.cols());
  joined << x1, x2;
  return jsd_over_points(p1(joined), p2(joined), x1.rows());
}

Real jsd_true(const LogDensityFn& p1,
              const distributions::DistributionSpec& spec, const Matrix& x1,
              const Matrix& xtrue) {
  if (x1.rows() != xtrue.rows() || x1.cols() != xtrue.cols()) {
    throw ShapeError("jsd_true needs equal-size sample sets");
  }
  const LogDensityFn p2 = true_log_density_fn(spec);  // throws if unsupported
  return jsd(p1, p2, x1, xtrue);
}

std::vector<int> solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ShapeError("cost matrix must be square");

  // Shortest augmenting path with dual potentials; 1-based with column 0 as
  // the virtual root.
  std::vector<Real> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Real> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> matched_row(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    matched_row[0] = i;
    int j0 = 0;
    std::vector<Real> min_reduced(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = matched_row[static_cast<std::size_t>(j0)];
      Real delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const Real cur =
            cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
            v[static_cast<std::size_t>(j)];
        if (cur < min_reduced[static_cast<std::size_t>(j)]) {
          min_reduced[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_reduced[static_cast<std::size_t>(j)] < delta) {
          delta = min_reduced[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(
              matched_row[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_reduced[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (matched_row[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      matched_row[static_cast<std::size_t>(j0)] =
          matched_row[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> col_of_row(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    col_of_row[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)]) -
               1] = j - 1;
  }
  return col_of_row;
}

namespace {

Real exact_emd(const Matrix& x, const Matrix& y) {
  const Index n = x.rows();
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      cost(i, j) = (x.row(i) - y.row(j)).norm();
    }
  }
  const auto cols = solve_assignment(cost);
  Real total = 0;
  for (Index i = 0; i < n; ++i) total += cost(i, cols[static_cast<std::size_t>(i)]);
  return total / static_cast<Real>(n);
}

Matrix subsample(const Matrix& x, Index take, std::uint64_t seed) {
  const Index n = x.rows();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  for (Index i = 0; i < take; ++i) {
    const Index j = i + rng.uniform_index(n - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Matrix out(take, x.cols());
  for (Index i = 0; i < take; ++i) {
    out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

Real emd(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw ShapeError("emd: dimension mismatch");
  if (x.rows() != y.rows()) throw ShapeError("emd: sets must have equal size");
  if (x.rows() == y.rows() && (x.array() == y.array()).all()) return 0.0;

  // canonical argument order keeps emd(x, y) bit-identical to emd(y, x)
  const std::uint64_t hx = content_hash(x);
  const std::uint64_t hy = content_hash(y);
  const Matrix& a = hx <= hy ? x : y;
  const Matrix& b = hx <= hy ? y : x;
  const std::uint64_t ha = std::min(hx, hy);
  const std::uint64_t hb = std::max(hx, hy);

  if (a.rows() <= kMaxExactEmd) return exact_emd(a, b);

  Real total = 0;
  for (int draw = 0; draw < kEmdSubsampleDraws; ++draw) {
    const Matrix sa =
        subsample(a, kMaxExactEmd,
                  derive_seed({ha, static_cast<std::uint64_t>(draw), 0}));
    const Matrix sb =
        subsample(b, kMaxExactEmd,
                  derive_seed({hb, static_cast<std::uint64_t>(draw), 1}));
    total += exact_emd(sa, sb);
  }
  return total / kEmdSubsampleDraws;
}

Real wasserstein_indicator(const Matrix& x1, const Matrix& x2,
                           const Matrix& xhat1) {
  const Real reference = emd(x1, x2);
  if (reference <= 0) {
    throw DegenerateError("reference Wasserstein distance is zero");
  }
  return (emd(x1, xhat1) - reference) / reference;
}

Real avg_log_likelihood(const LogDensityFn& p1, const Matrix& x2) {
  return p1(x2).mean();
}

FactorTest likelihood_factor(const std::vector<Real>& loglik_a,
                             const std::vector<Real>& loglik_b) {
  if (loglik_a.size() != loglik_b.size()) {
    throw ShapeError("paired lists must have equal length");
  }
  const std::size_t n = loglik_a.size();
  if (n < 2) throw ShapeError("need at least 2 paired values");

  std::vector<Real> factors(n);
  for (std::size_t i = 0; i < n; ++i) {
    factors[i] = std::exp(loglik_a[i] - loglik_b[i]);
  }
  FactorTest out;
  out.factor = std::accumulate(factors.begin(), factors.end(), 0.0) /
               static_cast<Real>(n);

  const Real mean_excess = out.factor - 1.0;
  Real var = 0;
  for (Real f : factors) {
    var += (f - out.factor) * (f - out.factor);
  }
  var /= static_cast<Real>(n - 1);
  const Real sd = std::sqrt(var);
  if (sd == 0) {
    out.p_value = mean_excess > 0 ? 0.0 : (mean_excess < 0 ? 1.0 : 0.5);
  } else {
    const Real t = mean_excess / (sd / std::sqrt(static_cast<Real>(n)));
    out.p_value = student_t_sf(t, static_cast<Real>(n - 1));
  }
  return out;
}

MetricReport make_report(std::string distribution, std::string config,
                         std::string metric, std::vector<Real> per_rep) {
  MetricReport r;
  r.distribution = std::move(distribution);
  r.config = std::move(config);
  r.metric = std::move(metric);
  r.per_rep = std::move(per_rep);
  r.reps = static_cast<int>(r.per_rep.size());
  if (r.reps > 0) {
    r.mean = std::accumulate(r.per_rep.begin(), r.per_rep.end(), 0.0) /
             static_cast<Real>(r.reps);
    if (r.reps > 1) {
      Real var = 0;
      for (Real v : r.per_rep) var += (v - r.mean) * (v - r.mean);
      r.stddev = std::sqrt(var / static_cast<Real>(r.reps - 1));
    }
  }
  return r;
}

}  // namespace rome::metrics

// Apache License, Version 2.0, refer to LICENSE.txt
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rome/distributions.hpp"
#include "rome/estimators.hpp"
#include "rome/metrics.hpp"
#include "rome/numeric.hpp"
#include "rome/random.hpp"

using namespace rome;
using metrics::LogDensityFn;

namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

LogDensityFn normal_1d(Real mu, Real sigma) {
  return [mu, sigma](const Matrix& q) {
    Vector out(q.rows());
    for (Index i = 0; i < q.rows(); ++i) {
      const Real z = (q(i, 0) - mu) / sigma;
      out(i) = -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * kPi));
    }
    return out;
  };
}

Matrix gaussian_sample_1d(Real mu, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, 1);
  for (Index i = 0; i < n; ++i) x(i, 0) = mu + rng.normal();
  return x;
}

Real brute_force_emd(const Matrix& x, const Matrix& y) {
  const Index n = x.rows();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Real best = std::numeric_limits<Real>::infinity();
  do {
    Real total = 0;
    for (Index i = 0; i < n; ++i) {
      total += (x.row(i) - y.row(perm[static_cast<std::size_t>(i)])).norm();
    }
    best = std::min(best, total / static_cast<Real>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix random_points(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, m);
  for (Index i = 0; i < n; ++i) x.row(i) = rng.normal_row(m) * 2.0;
  return x;
}

}  // namespace

TEST_CASE("identical densities have zero divergence") {
  const auto p = normal_1d(0.0, 1.0);
  const Matrix x1 = gaussian_sample_1d(0.0, 200, 1);
  const Matrix x2 = gaussian_sample_1d(0.0, 200, 2);
  CHECK(metrics::jsd(p, p, x1, x2) == 0.0);

  const auto spec = distributions::DistributionSpec::gaussian();
  const Dataset d = distributions::sample(spec, 120, 9);
  const auto model = estimators::fit(d, estimators::FitConfig{});
  const auto pm = metrics::log_density_fn(model);
  CHECK(metrics::jsd(pm, pm, d.values, d.values) == 0.0);
}

TEST_CASE("distant disjoint supports saturate the divergence at one") {
  const Real gap = 1e6;
  const auto p1 = normal_1d(0.0, 1.0);
  const auto p2 = normal_1d(gap, 1.0);
  const Matrix x1 = gaussian_sample_1d(0.0, 500, 3);
  const Matrix x2 = gaussian_sample_1d(gap, 500, 4);
  CHECK(metrics::jsd(p1, p2, x1, x2) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sample-based jsd matches the quadrature oracle") {
  const auto p1 = normal_1d(0.0, 1.0);
  const auto p2 = normal_1d(1.0, 1.0);

  // trapezoid quadrature of the closed-form integrand
  Real integral = 0;
  const Real step = 1e-3;
  for (Real x = -12.0; x < 13.0; x += step) {
    const Real a = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    const Real b =
        std::exp(-0.5 * (x - 1.0) * (x - 1.0)) / std::sqrt(2.0 * kPi);
    const Real s = a + b;
    Real term = 0;
    if (a > 0) term += 0.5 * a * std::log(2.0 * a / s);
    if (b > 0) term += 0.5 * b * std::log(2.0 * b / s);
    integral += term * step;
  }
  const Real oracle = integral / std::log(2.0);

  const Matrix x1 = gaussian_sample_1d(0.0, 10000, 5);
  const Matrix x2 = gaussian_sample_1d(1.0, 10000, 6);
  const Real estimate = metrics::jsd(p1, p2, x1, x2);
  CHECK(std::abs(estimate - oracle) < 0.02);
}

TEST_CASE("jsd stays within [0, 1] on mismatched models") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto p1 = normal_1d(static_cast<Real>(seed) * 0.5, 1.0 + 0.2 * seed);
    const auto p2 = normal_1d(-1.0, 0.5);
    const Matrix x1 = gaussian_sample_1d(0.0, 100, seed * 2 + 1);
    const Matrix x2 = gaussian_sample_1d(-1.0, 100, seed * 2 + 2);
    const Real v = metrics::jsd(p1, p2, x1, x2);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("jsd requires equal-size sets") {
  const auto p = normal_1d(0.0, 1.0);
  CHECK_THROWS_AS(metrics::jsd(p, p, gaussian_sample_1d(0, 10, 1),
                               gaussian_sample_1d(0, 11, 2)),
                  ShapeError);
}

TEST_CASE("jsd_true is zero for the exact density and rejects moons") {
  const auto spec = distributions::DistributionSpec::aniso();
  const auto exact = metrics::true_log_density_fn(spec);
  const Dataset x1 = distributions::sample(spec, 400, 31);
  const Dataset xt = distributions::sample(spec, 400, 32);
  CHECK(metrics::jsd_true(exact, spec, x1.values, xt.values) == 0.0);

  const auto model = estimators::fit(x1, estimators::FitConfig{});
  const Real v = metrics::jsd_true(metrics::log_density_fn(model), spec,
                                   x1.values, xt.values);
  CHECK(v > 0.0);
  CHECK(v < 0.15);

  const auto moons = distributions::DistributionSpec::two_moons();
  CHECK_THROWS_AS(metrics::jsd_true(exact, moons, x1.values, xt.values),
                  UnsupportedError);
}

TEST_CASE("emd identities") {
  const Matrix x = random_points(40, 2, 7);
  CHECK(metrics::emd(x, x) == 0.0);

  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  CHECK(metrics::emd(a, b) == doctest::Approx(5.0).epsilon(1e-14));

  CHECK_THROWS_AS(metrics::emd(random_points(4, 2, 1), random_points(5, 2, 2)),
                  ShapeError);
  CHECK_THROWS_AS(metrics::emd(random_points(4, 2, 1), random_points(4, 3, 2)),
                  ShapeError);
}

TEST_CASE("emd equals the brute-force permutation minimum") {
  Rng seeds(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + static_cast<Index>(seeds.uniform_index(6));
    const Index m = 1 + static_cast<Index>(seeds.uniform_index(3));
    const Matrix x = random_points(n, m, seeds.next_u64());
    const Matrix y = random_points(n, m, seeds.next_u64());
    CHECK(metrics::emd(x, y) ==
          doctest::Approx(brute_force_emd(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("emd is symmetric and satisfies the triangle inequality") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix x = random_points(30, 2, seed * 10 + 1);
    const Matrix y = random_points(30, 2, seed * 10 + 2);
    const Matrix z = random_points(30, 2, seed * 10 + 3);
    const Real xy = metrics::emd(x, y);
    const Real yx = metrics::emd(y, x);
    CHECK(xy == yx);  // canonical argument ordering makes this bit-exact
    CHECK(metrics::emd(x, z) <= xy + metrics::emd(y, z) + 1e-9);
  }
}

TEST_CASE("oversize sets subsample deterministically and symmetrically") {
  const Matrix x = random_points(1400, 2, 81);
  Matrix y = random_points(1400, 2, 82);
  y.array() += 0.5;
  const Real a = metrics::emd(x, y);
  const Real b = metrics::emd(x, y);
  const Real c = metrics::emd(y, x);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a > 0.0);
  CHECK(metrics::emd(x, x) == 0.0);
}

TEST_CASE("assignment solver handles adversarial ties") {
  Matrix cost(3, 3);
  cost << 1, 1, 1, 1, 1, 1, 1, 1, 1;
  const auto cols = metrics::solve_assignment(cost);
  std::vector<bool> used(3, false);
  for (int c : cols) {
    CHECK(!used[static_cast<std::size_t>(c)]);
    used[static_cast<std::size_t>(c)] = true;
  }
}

TEST_CASE("wasserstein indicator identities are exact") {
  const Matrix x1 = random_points(25, 2, 55);
  const Matrix x2 = random_points(25, 2, 56);
  CHECK(metrics::wasserstein_indicator(x1, x2, x2) == 0.0);
  CHECK(metrics::wasserstein_indicator(x1, x2, x1) == -1.0);
  CHECK_THROWS_AS(metrics::wasserstein_indicator(x1, x1, x2), DegenerateError);
}

TEST_CASE("oversmoothed samples push the indicator positive") {
  Rng rng(404);
  Matrix x1(300, 2), x2(300, 2), wide(300, 2);
  for (Index i = 0; i < 300; ++i) {
    x1.row(i) = rng.normal_row(2);
    x2.row(i) = rng.normal_row(2);
    wide.row(i) = rng.normal_row(2) * 2.0;  // twice the spread
  }
  CHECK(metrics::wasserstein_indicator(x1, x2, wide) > 0.0);
}

TEST_CASE("average log likelihood basics") {
  const auto p = normal_1d(0.0, 1.0);
  Matrix zero(1, 1);
  zero << 0.0;
  CHECK(metrics::avg_log_likelihood(p, zero) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-14));

  const Matrix x2 = gaussian_sample_1d(0.0, 400, 61);
  Matrix shuffled = x2;
  Rng rng(62);
  for (Index i = shuffled.rows() - 1; i > 0; --i) {
    const Index j = rng.uniform_index(i + 1);
    shuffled.row(i).swap(shuffled.row(j));
  }
  CHECK(metrics::avg_log_likelihood(p, x2) ==
        doctest::Approx(metrics::avg_log_likelihood(p, shuffled))
            .epsilon(1e-12));
}

TEST_CASE("the true density maximizes the average log likelihood") {
  const Matrix x2 = gaussian_sample_1d(0.0, 20000, 63);
  const Real truth = metrics::avg_log_likelihood(normal_1d(0.0, 1.0), x2);
  CHECK(truth > metrics::avg_log_likelihood(normal_1d(0.8, 1.0), x2));
  CHECK(truth > metrics::avg_log_likelihood(normal_1d(0.0, 2.5), x2));
  CHECK(truth > metrics::avg_log_likelihood(normal_1d(0.3, 0.6), x2));
}

TEST_CASE("likelihood factor identities") {
  std::vector<Real> base(50);
  for (std::size_t i = 0; i < base.size(); ++i) {
    base[i] = -2.0 + 0.01 * static_cast<Real>(i);
  }
  const auto same = metrics::likelihood_factor(base, base);
  CHECK(same.factor == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.p_value == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<Real> shifted = base;
  for (Real& v : shifted) v += std::log(2.0);
  const auto doubled = metrics::likelihood_factor(shifted, base);
  CHECK(doubled.factor == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(doubled.p_value == 0.0);  // constant factors, zero variance

  CHECK_THROWS_AS(metrics::likelihood_factor({1.0, 2.0}, {1.0}), ShapeError);
  CHECK_THROWS_AS(metrics::likelihood_factor({1.0}, {1.0}), ShapeError);
}

TEST_CASE("likelihood factor detects a consistent advantage") {
  Rng rng(77);
  std::vector<Real> a(40), b(40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    b[i] = -3.0 + 0.02 * rng.normal();
    a[i] = b[i] + 0.1 + 0.02 * rng.normal();
  }
  const auto ft = metrics::likelihood_factor(a, b);
  CHECK(ft.factor > 1.0);
  CHECK(ft.p_value < 0.01);
}

TEST_CASE("student t upper tail matches reference values") {
  CHECK(student_t_sf(0.0, 5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_sf(1.0, 7) ==
        doctest::Approx(0.175308331410104).epsilon(1e-10));
  CHECK(student_t_sf(2.5, 19) ==
        doctest::Approx(0.0108702055841987).epsilon(1e-10));
  CHECK(student_t_sf(-1.3, 19) ==
        doctest::Approx(0.895424249851336).epsilon(1e-10));
  CHECK(student_t_sf(4.0, 99) ==
        doctest::Approx(6.11257637855567e-05).epsilon(1e-8));
  CHECK(student_t_sf(0.7, 2) ==
        doctest::Approx(0.278196512316433).epsilon(1e-10));
}

TEST_CASE("incomplete beta endpoints") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("metric reports aggregate mean and std") {
  auto r = metrics::make_report("varied", "sil-rot-norm-kde", "jsd",
                                {1.0, 2.0, 3.0});
  CHECK(r.mean == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.stddev == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.reps == 3);

  auto single = metrics::make_report("varied", "cfg", "jsd", {4.0});
  CHECK(single.mean == 4.0);
  CHECK(single.stddev == 0.0);
  CHECK(single.reps == 1);
}

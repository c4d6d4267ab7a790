// Apache License, Version 2.0, refer to LICENSE.txt
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rome/distributions.hpp"
#include "rome/estimators.hpp"
#include "rome/model_io.hpp"
#include "rome/numeric.hpp"
#include "rome/random.hpp"

using namespace rome;
using estimators::Clustering;
using estimators::Downstream;
using estimators::FitConfig;
using estimators::RomeModel;

namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

FitConfig config(Clustering c, bool decorr, bool norm, Downstream d) {
  FitConfig cfg;
  cfg.clustering = c;
  cfg.decorrelate = decorr;
  cfg.normalize = norm;
  cfg.downstream = d;
  return cfg;
}

RomeModel single_kernel_model(const RowVector& center, Real bandwidth) {
  RomeModel model;
  model.dims = center.size();
  model.n_train = 1;
  estimators::Component comp;
  comp.weight = 1.0;
  comp.transform.mean = RowVector::Zero(center.size());
  comp.transform.rotation = Matrix::Identity(center.size(), center.size());
  comp.transform.scales = Vector::Ones(center.size());
  comp.transform.forward = Matrix::Identity(center.size(), center.size());
  comp.transform.log_abs_det = 0;
  Matrix centers(1, center.size());
  centers.row(0) = center;
  comp.model = estimators::KdeComponent{centers, bandwidth};
  model.components.push_back(std::move(comp));
  return model;
}

// plain-loop global Gaussian KDE, the independent oracle for the
// all-ablations-off configuration; factors out the largest exponent so far
// queries do not underflow
Real global_kde_oracle(const Matrix& train, const RowVector& x, Real b) {
  const Index n = train.rows();
  const Index m = train.cols();
  std::vector<Real> exponents(static_cast<std::size_t>(n));
  Real top = -std::numeric_limits<Real>::infinity();
  for (Index i = 0; i < n; ++i) {
    Real d2 = 0;
    for (Index j = 0; j < m; ++j) {
      const Real diff = x(j) - train(i, j);
      d2 += diff * diff;
    }
    exponents[static_cast<std::size_t>(i)] = -d2 / (2.0 * b * b);
    top = std::max(top, exponents[static_cast<std::size_t>(i)]);
  }
  Real sum = 0;
  for (Real e : exponents) sum += std::exp(e - top);
  return -0.5 * static_cast<Real>(m) * std::log(2.0 * kPi * b * b) + top +
         std::log(sum / static_cast<Real>(n));
}

}  // namespace

TEST_CASE("silverman bandwidth closed forms") {
  CHECK(estimators::silverman_bandwidth(2, 1000, false) ==
        doctest::Approx(0.31622776601683794).epsilon(1e-14));
  CHECK(estimators::silverman_bandwidth(2, 1, false) == 1.0);
  CHECK(estimators::silverman_bandwidth(2, 1, true) == 1.0);
  // the noise cluster always uses n = 1
  CHECK(estimators::silverman_bandwidth(24, 5000, true) ==
        doctest::Approx(std::pow(6.5, -1.0 / 28.0)).epsilon(1e-14));
  CHECK(estimators::silverman_bandwidth(24, 5000, true) ==
        doctest::Approx(0.93534).epsilon(5e-5));
}

TEST_CASE("unit ball volumes") {
  CHECK(std::exp(unit_ball_log_volume(1)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(unit_ball_log_volume(2)) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(std::exp(unit_ball_log_volume(3)) ==
        doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
}

TEST_CASE("single kernel density matches the closed form") {
  RowVector center = RowVector::Zero(2);
  const RomeModel model = single_kernel_model(center, 1.0);
  CHECK(estimators::log_density(model, center) ==
        doctest::Approx(std::log(1.0 / (2.0 * kPi))).epsilon(1e-12));
}

TEST_CASE("two-component mixture matches the two-term closed form") {
  const Real mu = 1.7;
  RomeModel model = single_kernel_model(RowVector::Constant(1, mu), 1.0);
  RomeModel other = single_kernel_model(RowVector::Constant(1, -mu), 1.0);
  model.components[0].weight = 0.5;
  other.components[0].weight = 0.5;
  model.components.push_back(other.components[0]);

  const Real phi = std::exp(-0.5 * mu * mu) / std::sqrt(2.0 * kPi);
  RowVector zero = RowVector::Zero(1);
  CHECK(estimators::log_density(model, zero) ==
        doctest::Approx(std::log(phi)).epsilon(1e-12));
}

TEST_CASE("the all-off configuration collapses to a plain global KDE") {
  const auto spec = distributions::DistributionSpec::varied();
  const Dataset d = distributions::sample(spec, 300, 3);
  const RomeModel model = estimators::fit(
      d, config(Clustering::none, false, false, Downstream::kde));
  REQUIRE(model.components.size() == 1);

  const Real b = estimators::silverman_bandwidth(2, 300, false);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    RowVector x = rng.normal_row(2) * 8.0;
    const Real expected = global_kde_oracle(d.values, x, b);
    CHECK(std::abs(estimators::log_density(model, x) - expected) <= 1e-12);
  }
}

TEST_CASE("aniso full fit produces three or four components") {
  const auto spec = distributions::DistributionSpec::aniso();
  const Dataset d = distributions::sample(spec, 1000, 12);
  const RomeModel model = estimators::fit(d, FitConfig{});
  CHECK(model.components.size() >= 3);
  CHECK(model.components.size() <= 4);
  Real total = 0;
  for (const auto& c : model.components) {
    CHECK(c.weight > 0);
    total += c.weight;
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("density normalizes for kde and gmm fits") {
  const auto spec = distributions::DistributionSpec::aniso();
  const Dataset d = distributions::sample(spec, 400, 6);
  for (Downstream down : {Downstream::kde, Downstream::gmm}) {
    const RomeModel model =
        estimators::fit(d, config(Clustering::silhouette, true, true, down));
    // jittered-grid Monte Carlo over a box holding essentially all mass
    const Real lo = d.values.minCoeff() - 8.0;
    const Real hi = d.values.maxCoeff() + 8.0;
    const Index grid = 316;  // ~1e5 points for the quick in-suite check
    const Real cell = (hi - lo) / static_cast<Real>(grid);
    Rng rng(77);
    Matrix q(grid * grid, 2);
    for (Index i = 0; i < grid; ++i) {
      for (Index j = 0; j < grid; ++j) {
        q(i * grid + j, 0) = lo + (static_cast<Real>(i) + rng.uniform()) * cell;
        q(i * grid + j, 1) = lo + (static_cast<Real>(j) + rng.uniform()) * cell;
      }
    }
    const Vector ld = estimators::log_density_batch(model, q);
    const Real integral = ld.array().exp().mean() * (hi - lo) * (hi - lo);
    CHECK(integral == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("component density through a transform equals the anisotropic oracle") {
  Rng rng(42);
  Matrix cluster(120, 2);
  for (Index i = 0; i < cluster.rows(); ++i) {
    const Real t = rng.normal();
    cluster(i, 0) = 3.0 * t + 0.2 * rng.normal() + 5.0;
    cluster(i, 1) = -2.0 * t + 0.1 * rng.normal() - 1.0;
  }
  Dataset d;
  d.values = cluster;
  const RomeModel model = estimators::fit(
      d, config(Clustering::none, true, true, Downstream::kde));
  REQUIRE(model.components.size() == 1);
  const auto& comp = model.components[0];
  const auto& kde = std::get<estimators::KdeComponent>(comp.model);

  // back-mapped kernels: centers through the inverse map, covariance
  // b^2 * R^T diag(scales^2) R
  const Matrix back = comp.transform.invert_all(kde.centers);
  const Matrix cov = kde.bandwidth * kde.bandwidth *
                     comp.transform.rotation.transpose() *
                     comp.transform.scales.array().square().matrix().asDiagonal() *
                     comp.transform.rotation;
  const Eigen::LLT<Matrix> chol(cov);
  for (int trial = 0; trial < 50; ++trial) {
    RowVector x = rng.normal_row(2) * 6.0;
    ArrayX terms(back.rows());
    for (Index i = 0; i < back.rows(); ++i) {
      terms(i) = mvn_log_pdf(x, back.row(i), chol) -
                 std::log(static_cast<Real>(back.rows()));
    }
    const Real oracle = log_sum_exp(terms);
    CHECK(estimators::log_density(model, x) ==
          doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("degenerate kernels sample at their center") {
  RowVector center(2);
  center << 4.0, -3.0;
  const RomeModel model = single_kernel_model(center, 1e-12);
  const Dataset s = estimators::sample_model(model, 50, 9);
  for (Index i = 0; i < s.size(); ++i) {
    CHECK((s.values.row(i) - center).norm() < 1e-9);
  }
}

TEST_CASE("sampling respects component weights") {
  RomeModel model = single_kernel_model(RowVector::Constant(2, 0.0), 0.5);
  RomeModel far = single_kernel_model(RowVector::Constant(2, 100.0), 0.5);
  model.components[0].weight = 0.3;
  far.components[0].weight = 0.7;
  model.components.push_back(far.components[0]);

  const Index n = 100000;
  const Dataset s = estimators::sample_model(model, n, 123);
  Index near_count = 0;
  for (Index i = 0; i < n; ++i) {
    if (s.values.row(i).norm() < 50.0) ++near_count;
  }
  // 3-sigma binomial band around p = 0.3
  const Real p = static_cast<Real>(near_count) / static_cast<Real>(n);
  const Real sigma = std::sqrt(0.3 * 0.7 / static_cast<Real>(n));
  CHECK(std::abs(p - 0.3) < 3.0 * sigma);
}

TEST_CASE("model sampling is deterministic per seed") {
  const auto spec = distributions::DistributionSpec::two_moons();
  const Dataset d = distributions::sample(spec, 300, 2);
  const RomeModel model = estimators::fit(d, FitConfig{});
  const Dataset a = estimators::sample_model(model, 500, 77);
  const Dataset b = estimators::sample_model(model, 500, 77);
  CHECK((a.values.array() == b.values.array()).all());
}

TEST_CASE("knn models cannot sample and flag their density as unnormalized") {
  const auto spec = distributions::DistributionSpec::gaussian();
  const Dataset d = distributions::sample(spec, 100, 2);
  const RomeModel model = estimators::fit(
      d, config(Clustering::none, false, true, Downstream::knn));
  CHECK_THROWS_AS(estimators::sample_model(model, 10, 1), UnsupportedError);
  CHECK_FALSE(model.sampleable());
  CHECK_FALSE(model.normalized_density());
  // densities are still queryable
  RowVector x = RowVector::Zero(2);
  CHECK(std::isfinite(estimators::log_density(model, x)));
}

TEST_CASE("knn density matches the hand-computed formula") {
  Matrix pts(2, 1);
  pts << 0.0, 1.0;
  estimators::KnnComponent knn{pts, 1};
  Matrix q(1, 1);
  q << 0.25;
  const Vector ld = estimators::component_log_pdf(knn, q);
  // k/(n * V_1 * d^1) = 1/(2 * 2 * 0.25) = 1
  CHECK(ld(0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("knn rule of thumb keeps k = floor(sqrt(n))") {
  Matrix pts = Matrix::Random(10, 2);
  CHECK(estimators::fit_knn_component(pts).k == 3);
  CHECK(estimators::fit_knn_component(Matrix::Random(2, 2)).k == 1);
}

TEST_CASE("gmm component matches exact moments") {
  const Real r = std::sqrt(1.5);
  Matrix pts(4, 2);
  pts << r, 0, -r, 0, 0, r, 0, -r;
  const auto gmm = estimators::fit_gmm_component(pts);
  CHECK(gmm.mean.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((gmm.covariance - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("gmm fallback covariance for a single sample") {
  Matrix pts(1, 2);
  pts << 2.0, 3.0;
  const auto gmm = estimators::fit_gmm_component(pts);
  const Real b = estimators::silverman_bandwidth(2, 1, true);
  CHECK((gmm.covariance - b * b * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK(gmm.mean(0) == 2.0);
}

TEST_CASE("rank-deficient gmm covariances receive jitter") {
  Matrix pts(3, 24);
  Rng rng(8);
  for (Index i = 0; i < 3; ++i) pts.row(i) = rng.normal_row(24);
  const auto gmm = estimators::fit_gmm_component(pts);  // rank 2 < 24
  Eigen::SelfAdjointEigenSolver<Matrix> es(gmm.covariance);
  CHECK(es.eigenvalues().minCoeff() > 0);
  Matrix q(1, 24);
  q = pts.row(0);
  CHECK(std::isfinite(estimators::component_log_pdf(gmm, q)(0)));
}

TEST_CASE("model samples score far better than far-field points") {
  const auto spec = distributions::DistributionSpec::aniso();
  const Dataset d = distributions::sample(spec, 500, 15);
  const RomeModel model = estimators::fit(d, FitConfig{});
  const Dataset own = estimators::sample_model(model, 2000, 3);
  Rng rng(6);
  Matrix far(2000, 2);
  for (Index i = 0; i < far.rows(); ++i) {
    far.row(i) = rng.normal_row(2) + RowVector::Constant(2, 500.0);
  }
  const Real own_ll = estimators::log_density_batch(model, own.values).mean();
  const Real far_ll = estimators::log_density_batch(model, far).mean();
  CHECK(own_ll > far_ll + 100.0);
}

TEST_CASE("fit rejects unusable inputs") {
  Dataset tiny;
  tiny.values = Matrix::Ones(1, 2);
  CHECK_THROWS_AS(estimators::fit(tiny, FitConfig{}), InsufficientDataError);

  Dataset bad;
  bad.values = Matrix::Ones(10, 2);
  bad.values(3, 1) = std::numeric_limits<Real>::infinity();
  CHECK_THROWS_AS(estimators::fit(bad, FitConfig{}), DataError);
}

TEST_CASE("log density rejects mismatched query dimensions") {
  const auto spec = distributions::DistributionSpec::gaussian();
  const Dataset d = distributions::sample(spec, 50, 1);
  const RomeModel model = estimators::fit(
      d, config(Clustering::none, false, false, Downstream::kde));
  Matrix q = Matrix::Zero(1, 3);
  CHECK_THROWS_AS(estimators::log_density_batch(model, q), ShapeError);
}

TEST_CASE("saved models reload to identical densities") {
  const auto spec = distributions::DistributionSpec::two_moons();
  const Dataset d = distributions::sample(spec, 150, 4);
  Rng rng(5);
  Matrix q(50, 2);
  for (Index i = 0; i < q.rows(); ++i) q.row(i) = rng.normal_row(2) * 2.0;

  for (Downstream down : {Downstream::kde, Downstream::gmm, Downstream::knn}) {
    const RomeModel model =
        estimators::fit(d, config(Clustering::silhouette, true, true, down));
    const auto reloaded =
        model_io::model_from_json(model_io::model_to_json(model));
    const Vector a = estimators::log_density_batch(model, q);
    const Vector b = estimators::log_density_batch(reloaded, q);
    CHECK((a.array() == b.array()).all());
    CHECK(reloaded.config.downstream == down);
    CHECK(reloaded.n_train == model.n_train);
  }
}

TEST_CASE("fit config json mirrors the field names") {
  FitConfig cfg = config(Clustering::none, false, true, Downstream::gmm);
  cfg.sigma_min_factor = 0.25;
  cfg.k_max = 17;
  const auto back = model_io::fit_config_from_json(
      model_io::fit_config_to_json(cfg));
  CHECK(back.clustering == Clustering::none);
  CHECK(back.decorrelate == false);
  CHECK(back.normalize == true);
  CHECK(back.downstream == Downstream::gmm);
  CHECK(back.sigma_min_factor == 0.25);
  CHECK(back.k_max == 17);
  CHECK(model_io::fit_config_from_json("{}").downstream == Downstream::kde);
  CHECK_THROWS_AS(model_io::fit_config_from_json("{nope"), ConfigError);
}

// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/distributions.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "rome/numeric.hpp"
#include "rome/random.hpp"

namespace rome::distributions {

namespace {

// Fixed base paths, 12 steps at 2.5 Hz inside x in [3, 8], y in [4, 8.5] m.
// Step lengths stay below 0.6 m (walking pace).
constexpr double kBasePaths[kTrajectoryBases][kTrajectorySteps][2] = {
    // straight walk along +x
    {{3.20, 6.2}, {3.62, 6.2}, {4.04, 6.2}, {4.46, 6.2}, {4.88, 6.2},
     {5.30, 6.2}, {5.72, 6.2}, {6.14, 6.2}, {6.56, 6.2}, {6.98, 6.2},
     {7.40, 6.2}, {7.82, 6.2}},
    // left turn
    {{3.300000, 4.600000}, {3.700000, 4.600000}, {4.096107, 4.655669},
     {4.480612, 4.765924}, {4.846030, 4.928619}, {5.185249, 5.140587},
     {5.491667, 5.397702}, {5.759319, 5.694960}, {5.982997, 6.026575},
     {6.158345, 6.386092}, {6.281952, 6.766515}, {6.351411, 7.160438}},
    // right turn
    {{3.300000, 8.100000}, {3.700000, 8.100000}, {4.096107, 8.044331},
     {4.480612, 7.934076}, {4.846030, 7.771381}, {5.185249, 7.559413},
     {5.491667, 7.302298}, {5.759319, 7.005040}, {5.982997, 6.673425},
     {6.158345, 6.313908}, {6.281952, 5.933485}, {6.351411, 5.539562}},
    // accelerating along +y
    {{5.6, 4.30}, {5.6, 4.48}, {5.6, 4.70}, {5.6, 4.96}, {5.6, 5.26},
     {5.6, 5.60}, {5.6, 5.98}, {5.6, 6.40}, {5.6, 6.86}, {5.6, 7.36},
     {5.6, 7.90}, {5.6, 8.48}},
    // decelerating along +x with a slight downward drift
    {{3.40, 7.30}, {3.98, 7.26}, {4.52, 7.22}, {5.02, 7.18}, {5.48, 7.14},
     {5.90, 7.10}, {6.28, 7.06}, {6.62, 7.02}, {6.92, 6.98}, {7.18, 6.94},
     {7.40, 6.90}, {7.58, 6.86}},
    // S-curve
    {{3.300000, 5.400000}, {3.700000, 5.697352}, {4.100000, 5.900298},
     {4.500000, 5.944402}, {4.900000, 5.815662}, {5.300000, 5.554953},
     {5.700000, 5.245047}, {6.100000, 4.984338}, {6.500000, 4.855598},
     {6.900000, 4.899702}, {7.300000, 5.102648}, {7.700000, 5.400000}}};

RowVector row2(Real x, Real y) {
  RowVector v(2);
  v << x, y;
  return v;
}

Matrix mat2(Real a, Real b, Real c, Real d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

MixtureParams three_blob_mixture(std::vector<RowVector> means,
                                 std::vector<Matrix> covs) {
  MixtureParams p;
  p.weights.assign(means.size(), 1.0 / static_cast<Real>(means.size()));
  p.means = std::move(means);
  p.covariances = std::move(covs);
  return p;
}

}  // namespace

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::aniso: return "aniso";
    case Kind::varied: return "varied";
    case Kind::two_moons: return "two_moons";
    case Kind::trajectories: return "trajectories";
    case Kind::gaussian: return "gaussian";
    case Kind::elliptical: return "elliptical";
    case Kind::rotated_elliptical: return "rotated_elliptical";
    case Kind::trajectories_uni_modal: return "trajectories_uni_modal";
  }
  throw ConfigError("unknown distribution kind");
}

Index DistributionSpec::dims() const {
  if (std::holds_alternative<TrajectoryParams>(params)) {
    return 2 * kTrajectorySteps;
  }
  return 2;
}

// Aniso: three isotropic unit blobs pushed through the shear
// [[0.6, -0.6], [-0.4, 0.8]]. The pre-shear means sit along the direction the
// shear maps perpendicular to the blobs' long axis, so the modes end up as
// three well-separated parallel streaks.
DistributionSpec DistributionSpec::aniso() {
  const Matrix shear = mat2(0.6, -0.6, -0.4, 0.8);
  const Matrix cov = shear.transpose() * shear;
  std::vector<RowVector> pre = {row2(-18, -17), row2(0, 0), row2(18, 17)};
  std::vector<RowVector> means;
  for (const auto& m : pre) means.push_back(m * shear);
  return {Kind::aniso, three_blob_mixture(means, {cov, cov, cov})};
}

DistributionSpec DistributionSpec::varied() {
  return {Kind::varied,
          three_blob_mixture(
              {row2(-8, -8), row2(8, -8), row2(0, 8)},
              {mat2(1.0, 0, 0, 1.0), mat2(6.25, 0, 0, 6.25),
               mat2(0.25, 0, 0, 0.25)})};
}

DistributionSpec DistributionSpec::two_moons() {
  return {Kind::two_moons, MoonsParams{}};
}

DistributionSpec DistributionSpec::trajectories() {
  return {Kind::trajectories, TrajectoryParams{}};
}

DistributionSpec DistributionSpec::gaussian() {
  return {Kind::gaussian,
          three_blob_mixture({row2(0, 0)}, {mat2(1, 0, 0, 1)})};
}

DistributionSpec DistributionSpec::elliptical() {
  return {Kind::elliptical,
          three_blob_mixture({row2(0, 0)}, {mat2(4.0, 0, 0, 0.04)})};
}

DistributionSpec DistributionSpec::rotated_elliptical() {
  // elliptical rotated by 45 degrees
  return {Kind::rotated_elliptical,
          three_blob_mixture({row2(0, 0)}, {mat2(2.02, 1.98, 1.98, 2.02)})};
}

DistributionSpec DistributionSpec::trajectories_uni_modal() {
  TrajectoryParams p;
  p.base_indices = {0};
  return {Kind::trajectories_uni_modal, p};
}

DistributionSpec DistributionSpec::by_name(const std::string& name) {
  if (name == "aniso") return aniso();
  if (name == "varied") return varied();
  if (name == "two_moons") return two_moons();
  if (name == "trajectories") return trajectories();
  if (name == "gaussian") return gaussian();
  if (name == "elliptical") return elliptical();
  if (name == "rotated_elliptical") return rotated_elliptical();
  if (name == "trajectories_uni_modal") return trajectories_uni_modal();
  throw ConfigError("unknown distribution: " + name);
}

std::array<Matrix, kTrajectoryBases> base_trajectories() {
  std::array<Matrix, kTrajectoryBases> out;
  for (int b = 0; b < kTrajectoryBases; ++b) {
    out[b].resize(kTrajectorySteps, 2);
    for (int t = 0; t < kTrajectorySteps; ++t) {
      out[b](t, 0) = kBasePaths[b][t][0];
      out[b](t, 1) = kBasePaths[b][t][1];
    }
  }
  return out;
}

namespace {

void sample_mixture(const MixtureParams& p, Index n, Rng& rng, Matrix& out,
                    std::vector<int>& labels) {
  const Index m = p.means.front().size();
  std::vector<Eigen::LLT<Matrix>> chols;
  chols.reserve(p.covariances.size());
  for (const auto& cov : p.covariances) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw ConfigError("mixture covariance is not positive definite");
    }
    chols.push_back(std::move(llt));
  }
  std::vector<Real> cum(p.weights.size());
  Real acc = 0;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    acc += p.weights[k];
    cum[k] = acc;
  }
  for (Index i = 0; i < n; ++i) {
    const Real u = rng.uniform() * acc;
    std::size_t k = 0;
    while (k + 1 < cum.size() && u > cum[k]) ++k;
    Vector z(m);
    for (Index j = 0; j < m; ++j) z(j) = rng.normal();
    out.row(i) =
        p.means[k] + (chols[k].matrixL() * z).transpose();
    labels[i] = static_cast<int>(k);
  }
}

void sample_moons(const MoonsParams& p, Index n, Rng& rng, Matrix& out,
                  std::vector<int>& labels) {
  for (Index i = 0; i < n; ++i) {
    const bool second = rng.uniform() >= 0.5;
    const Real t = rng.uniform() * std::numbers::pi_v<Real>;
    Real x, y;
    if (!second) {
      x = std::cos(t);
      y = std::sin(t);
    } else {
      x = 1.0 - std::cos(t);
      y = 0.5 - std::sin(t);
    }
    out(i, 0) = x + p.noise_std * rng.normal();
    out(i, 1) = y + p.noise_std * rng.normal();
    labels[i] = second ? 1 : 0;
  }
}

void sample_trajectories(const TrajectoryParams& p, Index n, Rng& rng,
                         Matrix& out, std::vector<int>& labels) {
  if (p.base_indices.empty()) throw ConfigError("no base trajectories");
  const auto bases = base_trajectories();
  for (Index i = 0; i < n; ++i) {
    const Index pick = rng.uniform_index(
        static_cast<Index>(p.base_indices.size()));
    const int base = p.base_indices[static_cast<std::size_t>(pick)];
    const Real theta = p.rotation_std * rng.normal();
    const Real s = 1.0 + p.scale_std * rng.normal();
    const Real c = std::cos(theta), si = std::sin(theta);
    Matrix rot(2, 2);
    rot << c, -si, si, c;
    Matrix path = s * bases[base] * rot.transpose();
    // L * n: cumulative sum of the per-step noise over timesteps
    Real cx = 0, cy = 0;
    for (int t = 0; t < kTrajectorySteps; ++t) {
      cx += p.noise_std * rng.normal();
      cy += p.noise_std * rng.normal();
      out(i, 2 * t) = path(t, 0) + cx;
      out(i, 2 * t + 1) = path(t, 1) + cy;
    }
    labels[i] = static_cast<int>(pick);
  }
}

}  // namespace

Dataset sample(const DistributionSpec& spec, Index n, std::uint64_t seed,
               std::vector<int>& labels_out) {
  if (n < 1) throw ConfigError("sample size must be at least 1");
  Dataset data;
  data.seed = seed;
  data.spec_tag = spec.name();
  data.values.resize(n, spec.dims());
  labels_out.assign(static_cast<std::size_t>(n), 0);
  Rng rng(seed);
  if (const auto* p = std::get_if<MixtureParams>(&spec.params)) {
    sample_mixture(*p, n, rng, data.values, labels_out);
  } else if (const auto* p = std::get_if<MoonsParams>(&spec.params)) {
    sample_moons(*p, n, rng, data.values, labels_out);
  } else {
    sample_trajectories(std::get<TrajectoryParams>(spec.params), n, rng,
                        data.values, labels_out);
  }
  return data;
}

Dataset sample(const DistributionSpec& spec, Index n, std::uint64_t seed) {
  std::vector<int> labels;
  return sample(spec, n, seed, labels);
}

bool has_true_log_density(const DistributionSpec& spec) {
  return std::holds_alternative<MixtureParams>(spec.params);
}

std::optional<Real> true_log_density(const DistributionSpec& spec,
                                     const RowVector& x) {
  if (x.size() != spec.dims()) {
    throw ShapeError("query dimension mismatch");
  }
  const auto* p = std::get_if<MixtureParams>(&spec.params);
  if (p == nullptr) return std::nullopt;
  ArrayX terms(static_cast<Index>(p->weights.size()));
  for (std::size_t k = 0; k < p->weights.size(); ++k) {
    Eigen::LLT<Matrix> chol(p->covariances[k]);
    terms(static_cast<Index>(k)) =
        std::log(p->weights[k]) + mvn_log_pdf(x, p->means[k], chol);
  }
  return log_sum_exp(terms);
}

}  // namespace rome::distributions

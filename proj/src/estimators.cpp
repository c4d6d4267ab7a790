// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/estimators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rome/numeric.hpp"
#include "rome/optics.hpp"
#include "rome/random.hpp"

namespace rome::estimators {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kLog2Pi = 1.8378770664093454836;
constexpr Real kGmmJitter = 1e-9;
constexpr Real kGmmEigenFloor = 1e-12;
}  // namespace

std::string clustering_name(Clustering c) {
  return c == Clustering::silhouette ? "silhouette" : "none";
}

std::string downstream_name(Downstream d) {
  switch (d) {
    case Downstream::kde: return "kde";
    case Downstream::gmm: return "gmm";
    case Downstream::knn: return "knn";
  }
  throw ConfigError("unknown downstream");
}

Clustering clustering_by_name(const std::string& name) {
  if (name == "silhouette") return Clustering::silhouette;
  if (name == "none") return Clustering::none;
  throw ConfigError("unknown clustering: " + name);
}

Downstream downstream_by_name(const std::string& name) {
  if (name == "kde") return Downstream::kde;
  if (name == "gmm") return Downstream::gmm;
  if (name == "knn") return Downstream::knn;
  throw ConfigError("unknown downstream: " + name);
}

std::string FitConfig::name() const {
  std::string out = clustering == Clustering::silhouette ? "sil" : "noclust";
  out += decorrelate ? "-rot" : "-norot";
  out += normalize ? "-norm" : "-nonorm";
  out += "-" + downstream_name(downstream);
  return out;
}

Real silverman_bandwidth(Index m, Index n_cluster, bool is_noise) {
  if (m < 1 || n_cluster < 1) throw ConfigError("invalid bandwidth inputs");
  const Real n = is_noise ? 1.0 : static_cast<Real>(n_cluster);
  return std::pow((static_cast<Real>(m) + 2.0) / 4.0 * n,
                  -1.0 / (static_cast<Real>(m) + 4.0));
}

GmmComponent make_gmm_component(RowVector mean, Matrix covariance) {
  GmmComponent g;
  g.mean = std::move(mean);
  g.covariance = std::move(covariance);
  g.chol.compute(g.covariance);
  if (g.chol.info() != Eigen::Success) {
    g.covariance += kGmmJitter * Matrix::Identity(g.covariance.rows(),
                                                  g.covariance.cols());
    g.chol.compute(g.covariance);
    if (g.chol.info() != Eigen::Success) {
      throw DataError("component covariance is not positive definite");
    }
  }
  g.log_det =
      2.0 * g.chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return g;
}

GmmComponent fit_gmm_component(const Matrix& transformed) {
  const Index n = transformed.rows();
  const Index m = transformed.cols();
  if (n < 2) {
    const Real b = silverman_bandwidth(m, 1, true);
    RowVector mean = n == 1 ? RowVector(transformed.row(0))
                            : RowVector(RowVector::Zero(m));
    return make_gmm_component(std::move(mean), b * b * Matrix::Identity(m, m));
  }
  const RowVector mean = transformed.colwise().mean();
  const Matrix centered = transformed.rowwise() - mean;
  Matrix cov = centered.transpose() * centered / static_cast<Real>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.eigenvalues().minCoeff() < kGmmEigenFloor) {
    cov += kGmmJitter * Matrix::Identity(m, m);
  }
  return make_gmm_component(mean, std::move(cov));
}

KnnComponent fit_knn_component(const Matrix& transformed) {
  KnnComponent k;
  k.points = transformed;
  k.k = std::max(1, static_cast<int>(std::floor(
                        std::sqrt(static_cast<Real>(transformed.rows())))));
  return k;
}

namespace {

Vector kde_log_pdf(const KdeComponent& kde, const Matrix& z) {
  const Index p = z.rows();
  const Index n = kde.centers.rows();
  const Index m = kde.centers.cols();
  const Real b = kde.bandwidth;
  const Real inv_two_b2 = 1.0 / (2.0 * b * b);
  const Real offset = -std::log(static_cast<Real>(n)) -
                      static_cast<Real>(m) * std::log(b) -
                      0.5 * static_cast<Real>(m) * kLog2Pi;

  Vector out(p);
  const Index block = std::max<Index>(1, std::min<Index>(p, 4'000'000 / n));
  Matrix args(block, n);
  for (Index row = 0; row < p; row += block) {
    const Index rows = std::min(block, p - row);
    for (Index j = 0; j < n; ++j) {
      args.col(j).head(rows) =
          (z.middleRows(row, rows).rowwise() - kde.centers.row(j))
              .rowwise()
              .squaredNorm() *
          -inv_two_b2;
    }
    auto active = args.topRows(rows);
    const Vector row_max = active.rowwise().maxCoeff();
    out.segment(row, rows) =
        row_max.array() +
        (active.colwise() - row_max).array().exp().rowwise().sum().log() +
        offset;
  }
  return out;
}

Vector gmm_log_pdf(const GmmComponent& gmm, const Matrix& z) {
  const Index m = z.cols();
  const Matrix diffs = z.rowwise() - gmm.mean;
  const Matrix solved = gmm.chol.matrixL().solve(diffs.transpose());
  return (-0.5 *
          (solved.colwise().squaredNorm().array() + gmm.log_det +
           static_cast<Real>(m) * kLog2Pi))
      .transpose();
}

Vector knn_log_pdf(const KnnComponent& knn, const Matrix& z) {
  const Index p = z.rows();
  const Index n = knn.points.rows();
  const Index m = knn.points.cols();
  const int k = std::min<int>(knn.k, static_cast<int>(n));
  const Real log_const = std::log(static_cast<Real>(k)) -
                         std::log(static_cast<Real>(n)) -
                         unit_ball_log_volume(static_cast<int>(m));
  Vector out(p);
  std::vector<Real> buf(static_cast<std::size_t>(n));
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < n; ++j) {
      buf[static_cast<std::size_t>(j)] =
          (z.row(i) - knn.points.row(j)).squaredNorm();
    }
    std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end());
    const Real d2 = buf[static_cast<std::size_t>(k - 1)];
    out(i) = d2 > 0
                 ? log_const - 0.5 * static_cast<Real>(m) * std::log(d2)
                 : kInf;
  }
  return out;
}

}  // namespace

Vector component_log_pdf(const ComponentModel& component, const Matrix& z) {
  if (const auto* kde = std::get_if<KdeComponent>(&component)) {
    return kde_log_pdf(*kde, z);
  }
  if (const auto* gmm = std::get_if<GmmComponent>(&component)) {
    return gmm_log_pdf(*gmm, z);
  }
  return knn_log_pdf(std::get<KnnComponent>(component), z);
}

RomeModel fit(const Dataset& data, const FitConfig& config) {
  const Index n = data.size();
  const Index m = data.dims();
  if (n < 2) throw InsufficientDataError("need at least 2 samples to fit");
  if (!data.values.allFinite()) throw DataError("non-finite input sample");

  Real scale_base = transforms::column_stds(data.values).maxCoeff();
  if (!(scale_base > 0)) scale_base = 1.0;
  const Real sigma_min = config.sigma_min_factor * scale_base;
  if (!(sigma_min > 0)) throw ConfigError("sigma_min_factor must be positive");

  optics::ClusterSet clusters;
  if (config.clustering == Clustering::silhouette) {
    const int k =
        optics::core_smoothing_k(n, m, config.k_min, config.k_max,
                                 config.alpha_k);
    const auto ordering = optics::reachability_analysis(data.values, k);
    clusters = optics::select_clustering(data.values, ordering);
  } else {
    clusters.clusters.emplace_back();
    for (Index i = 0; i < n; ++i) clusters.clusters.front().push_back(i);
    clusters.score = -1.1;
  }

  auto gather = [&](const std::vector<Index>& idx) {
    Matrix sub(static_cast<Index>(idx.size()), m);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      sub.row(static_cast<Index>(r)) = data.values.row(idx[r]);
    }
    return sub;
  };

  std::vector<Matrix> cluster_samples;
  std::vector<Vector> nonnoise_stds;
  for (const auto& members : clusters.clusters) {
    cluster_samples.push_back(gather(members));
    nonnoise_stds.push_back(transforms::column_stds(cluster_samples.back()));
  }

  const transforms::TransformOptions opts{config.decorrelate,
                                          config.normalize};
  RomeModel model;
  model.config = config;
  model.dims = m;
  model.n_train = n;

  auto add_component = [&](const Matrix& sub, bool is_noise) {
    Component comp;
    comp.is_noise = is_noise;
    comp.weight = static_cast<Real>(sub.rows()) / static_cast<Real>(n);
    comp.transform = transforms::build_transform(sub, is_noise, nonnoise_stds,
                                                 sigma_min, opts);
    const Matrix transformed = comp.transform.apply_all(sub);
    switch (config.downstream) {
      case Downstream::kde:
        comp.model = KdeComponent{
            transformed, silverman_bandwidth(m, sub.rows(), is_noise)};
        break;
      case Downstream::gmm:
        comp.model = fit_gmm_component(transformed);
        break;
      case Downstream::knn:
        comp.model = fit_knn_component(transformed);
        break;
    }
    model.components.push_back(std::move(comp));
  };

  for (const auto& sub : cluster_samples) add_component(sub, false);
  if (!clusters.noise.empty()) add_component(gather(clusters.noise), true);
  return model;
}

Vector log_density_batch(const RomeModel& model, const Matrix& queries) {
  if (queries.cols() != model.dims) throw ShapeError("query dimension mismatch");
  const Index p = queries.rows();
  Vector acc = Vector::Constant(p, -kInf);
  for (const auto& comp : model.components) {
    const Matrix z = comp.transform.apply_all(queries);
    Vector term = component_log_pdf(comp.model, z);
    const Real shift = std::log(comp.weight) + comp.transform.log_abs_det;
    for (Index i = 0; i < p; ++i) {
      acc(i) = log_add_exp(acc(i), term(i) + shift);
    }
  }
  return acc;
}

Real log_density(const RomeModel& model, const RowVector& x) {
  Matrix q(1, x.size());
  q.row(0) = x;
  return log_density_batch(model, q)(0);
}

Dataset sample_model(const RomeModel& model, Index n, std::uint64_t seed) {
  if (!model.sampleable()) {
    throw UnsupportedError("knn downstream cannot generate samples");
  }
  if (n < 1) throw ConfigError("sample size must be at least 1");
  if (model.components.empty()) throw DataError("model has no components");

  std::vector<Real> cum;
  Real acc = 0;
  for (const auto& comp : model.components) {
    acc += comp.weight;
    cum.push_back(acc);
  }

  Dataset out;
  out.seed = seed;
  out.spec_tag = "model";
  out.values.resize(n, model.dims);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    const Real u = rng.uniform() * acc;
    std::size_t c = 0;
    while (c + 1 < cum.size() && u > cum[c]) ++c;
    const Component& comp = model.components[c];
    RowVector z(model.dims);
    if (const auto* kde = std::get_if<KdeComponent>(&comp.model)) {
      const Index center = rng.uniform_index(kde->centers.rows());
      z = kde->centers.row(center) + kde->bandwidth * rng.normal_row(model.dims);
    } else {
      const auto& gmm = std::get<GmmComponent>(comp.model);
      const Vector noise = rng.normal_row(model.dims).transpose();
      z = gmm.mean + (gmm.chol.matrixL() * noise).transpose();
    }
    out.values.row(i) = comp.transform.invert(z);
  }
  return out;
}

}  // namespace rome::estimators

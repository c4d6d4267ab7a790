// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Cholesky>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rome/transforms.hpp"
#include "rome/types.hpp"

namespace rome::estimators {

enum class Clustering { silhouette, none };
enum class Downstream { kde, gmm, knn };

std::string clustering_name(Clustering c);
std::string downstream_name(Downstream d);
Clustering clustering_by_name(const std::string& name);
Downstream downstream_by_name(const std::string& name);

struct FitConfig {
  Clustering clustering = Clustering::silhouette;
  bool decorrelate = true;
  bool normalize = true;
  Downstream downstream = Downstream::kde;
  Real sigma_min_factor = 0.1;
  int k_min = 5;
  int k_max = 20;
  Real alpha_k = 400.0;

  /// Compact label used in CSV reports, e.g. "sil-rot-norm-kde".
  std::string name() const;
};

struct KdeComponent {
  Matrix centers;   // transformed samples, one kernel per row
  Real bandwidth;   // isotropic kernel std from Silverman's rule
};

struct GmmComponent {
  RowVector mean;
  Matrix covariance;
  Eigen::LLT<Matrix> chol;  // cached factor of covariance
  Real log_det = 0;
};

GmmComponent make_gmm_component(RowVector mean, Matrix covariance);

struct KnnComponent {
  Matrix points;
  int k = 1;
};

using ComponentModel = std::variant<KdeComponent, GmmComponent, KnnComponent>;

struct Component {
  ComponentModel model;
  transforms::ClusterTransform transform;
  Real weight = 0;
  bool is_noise = false;
};

/// Fitted mixture-of-transformed-components model; immutable after fit.
struct RomeModel {
  std::vector<Component> components;
  FitConfig config;
  Index dims = 0;
  Index n_train = 0;

  bool sampleable() const { return config.downstream != Downstream::knn; }
  /// knn densities carry an unknown scaling factor
  bool normalized_density() const {
    return config.downstream != Downstream::knn;
  }
};

/// b = ((m+2)/4 * n)^(-1/(m+4)) with n = 1 for the noise cluster.
Real silverman_bandwidth(Index m, Index n_cluster, bool is_noise);

GmmComponent fit_gmm_component(const Matrix& transformed);
KnnComponent fit_knn_component(const Matrix& transformed);

RomeModel fit(const Dataset& data, const FitConfig& config);

Real log_density(const RomeModel& model, const RowVector& x);
Vector log_density_batch(const RomeModel& model, const Matrix& queries);

Dataset sample_model(const RomeModel& model, Index n, std::uint64_t seed);

/// Per-component log densities used by log_density_batch; exposed for tests.
Vector component_log_pdf(const ComponentModel& component, const Matrix& z);

}  // namespace rome::estimators

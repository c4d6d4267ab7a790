// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/transforms.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rome::transforms {

RowVector ClusterTransform::apply(const RowVector& x) const {
  return (x - mean) * forward;
}

RowVector ClusterTransform::invert(const RowVector& z) const {
  return (z.cwiseProduct(scales.transpose())) * rotation + mean;
}

Matrix ClusterTransform::apply_all(const Matrix& points) const {
  return (points.rowwise() - mean) * forward;
}

Matrix ClusterTransform::invert_all(const Matrix& points) const {
  return (points.array().rowwise() * scales.transpose().array()).matrix() *
             rotation +
         Matrix::Ones(points.rows(), 1) * mean;
}

Vector column_stds(const Matrix& points) {
  const Index n = points.rows();
  if (n < 2) return Vector::Zero(points.cols());
  const RowVector mean = points.colwise().mean();
  return ((points.rowwise() - mean).colwise().squaredNorm() /
          static_cast<Real>(n - 1))
      .cwiseSqrt()
      .transpose();
}

Matrix pca_rotation(const Matrix& centered) {
  const Index m = centered.cols();
  const Index n = centered.rows();
  if (n < 2) return Matrix::Identity(m, m);

  const Matrix cov =
      centered.transpose() * centered / static_cast<Real>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DataError("eigendecomposition failed");
  }
  // eigenvalues come out ascending; rows of the rotation are the
  // eigenvectors by descending eigenvalue
  Matrix rotation(m, m);
  for (Index r = 0; r < m; ++r) {
    rotation.row(r) = solver.eigenvectors().col(m - 1 - r).transpose();
    Index arg = 0;
    rotation.row(r).cwiseAbs().maxCoeff(&arg);
    if (rotation(r, arg) < 0) rotation.row(r) = -rotation.row(r);
  }
  if (rotation.determinant() < 0) rotation.row(m - 1) = -rotation.row(m - 1);
  return rotation;
}

Vector regularized_scales(const Vector& rotated_stds, Real sigma_min) {
  if (sigma_min <= 0) throw ConfigError("sigma_min must be positive");
  const Index m = rotated_stds.size();
  const Real s_max = rotated_stds.maxCoeff();
  if (!(s_max > 0)) return Vector::Constant(m, sigma_min);
  // sigma + sigma_min * (1 - sigma/s_max): algebraically identical to the
  // (1 - sigma_min/s_max) * sigma + sigma_min form but maps the largest std
  // to itself exactly
  Vector out(m);
  for (Index i = 0; i < m; ++i) {
    out(i) = rotated_stds(i) + sigma_min * (1.0 - rotated_stds(i) / s_max);
  }
  return out;
}

Vector regularized_scales(const std::vector<Vector>& nonnoise_raw_stds,
                          Index dims, Real sigma_min) {
  if (sigma_min <= 0) throw ConfigError("sigma_min must be positive");
  if (nonnoise_raw_stds.empty()) return Vector::Constant(dims, sigma_min);
  Vector mean = Vector::Zero(dims);
  for (const auto& stds : nonnoise_raw_stds) mean += stds;
  mean /= static_cast<Real>(nonnoise_raw_stds.size());
  return mean.cwiseMax(sigma_min);
}

ClusterTransform build_transform(const Matrix& cluster_samples, bool is_noise,
                                 const std::vector<Vector>& nonnoise_raw_stds,
                                 Real sigma_min, const TransformOptions& opts) {
  if (cluster_samples.rows() < 1) throw InsufficientDataError("empty cluster");
  const Index m = cluster_samples.cols();

  ClusterTransform t;
  t.mean = cluster_samples.colwise().mean();
  const Matrix centered = cluster_samples.rowwise() - t.mean;

  if (!is_noise && opts.decorrelate) {
    t.rotation = pca_rotation(centered);
  } else {
    t.rotation = Matrix::Identity(m, m);
  }

  if (!opts.normalize) {
    t.scales = Vector::Ones(m);
  } else if (is_noise) {
    t.scales = regularized_scales(nonnoise_raw_stds, m, sigma_min);
  } else {
    const Matrix rotated = centered * t.rotation.transpose();
    t.scales = regularized_scales(column_stds(rotated), sigma_min);
  }

  t.forward = t.rotation.transpose() * t.scales.cwiseInverse().asDiagonal();
  t.log_abs_det = -t.scales.array().log().sum();
  return t;
}

}  // namespace rome::transforms

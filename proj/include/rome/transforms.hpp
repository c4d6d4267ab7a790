// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <vector>

#include "rome/types.hpp"

namespace rome::transforms {

/// Per-cluster decorrelation + normalization map. With row-vector samples,
/// forward = R^T * diag(scales)^-1 and a point maps as (x - mean) * forward.
struct ClusterTransform {
  RowVector mean;
  Matrix rotation;   // rows are the principal directions, det = +1
  Vector scales;     // diagonal of the regularized std matrix
  Matrix forward;
  Real log_abs_det = 0;  // ln|det forward| = -sum(ln scales)

  RowVector apply(const RowVector& x) const;
  RowVector invert(const RowVector& z) const;
  Matrix apply_all(const Matrix& points) const;
  Matrix invert_all(const Matrix& points) const;
};

/// Rows are unit eigenvectors of the sample covariance of the centered input,
/// sorted by descending eigenvalue. Signs are fixed so each row's
/// largest-magnitude entry is positive, then the last row is flipped if
/// needed so the determinant is +1. Fewer than two samples yields identity.
Matrix pca_rotation(const Matrix& centered);

/// Normal-cluster branch: largest rotated std maps to itself, the rest are
/// pulled up toward sigma_min.
Vector regularized_scales(const Vector& rotated_stds, Real sigma_min);

/// Noise branch: per-dimension mean of the non-noise clusters' raw stds,
/// floored at sigma_min.
Vector regularized_scales(const std::vector<Vector>& nonnoise_raw_stds,
                          Index dims, Real sigma_min);

struct TransformOptions {
  bool decorrelate = true;
  bool normalize = true;
};

/// Composes mean, rotation (identity for noise clusters), scales and the
/// forward map for one cluster. `nonnoise_raw_stds` is only consulted for the
/// noise branch.
ClusterTransform build_transform(const Matrix& cluster_samples, bool is_noise,
                                 const std::vector<Vector>& nonnoise_raw_stds,
                                 Real sigma_min, const TransformOptions& opts);

/// Column stds with 1/(n-1) normalization; zeros for n < 2.
Vector column_stds(const Matrix& points);

}  // namespace rome::transforms

// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rome/types.hpp"

namespace rome::distributions {

enum class Kind {
  aniso,
  varied,
  two_moons,
  trajectories,
  gaussian,
  elliptical,
  rotated_elliptical,
  trajectories_uni_modal,
};

std::string kind_name(Kind kind);

/// Weighted Gaussian mixture; the exact density is available for these kinds.
struct MixtureParams {
  std::vector<Real> weights;
  std::vector<RowVector> means;
  std::vector<Matrix> covariances;
};

/// Two interleaved half circles of radius 1 with isotropic Gaussian noise.
struct MoonsParams {
  Real noise_std = 0.08;
};

/// x = s * base_i * R_theta^T + L * n over the compiled-in base paths, with
/// i uniform over `base_indices`, theta ~ N(0, rotation_std^2),
/// s ~ N(1, scale_std^2), n entrywise N(0, noise_std^2) and L the
/// lower-triangular all-ones matrix (cumulative-sum noise over timesteps).
struct TrajectoryParams {
  Real rotation_std = 0.0174532925199432957692;  // pi / 180
  Real scale_std = 0.03;
  Real noise_std = 0.03;
  std::vector<int> base_indices = {0, 1, 2, 3, 4, 5};
};

struct DistributionSpec {
  Kind kind;
  std::variant<MixtureParams, MoonsParams, TrajectoryParams> params;

  Index dims() const;
  std::string name() const { return kind_name(kind); }

  static DistributionSpec aniso();
  static DistributionSpec varied();
  static DistributionSpec two_moons();
  static DistributionSpec trajectories();
  static DistributionSpec gaussian();
  static DistributionSpec elliptical();
  static DistributionSpec rotated_elliptical();
  static DistributionSpec trajectories_uni_modal();
  static DistributionSpec by_name(const std::string& name);
};

constexpr int kTrajectorySteps = 12;
constexpr int kTrajectoryBases = 6;

/// The six fixed 12x2 base paths (straight, left turn, right turn,
/// accelerating, decelerating, S-curve), in meters.
std::array<Matrix, kTrajectoryBases> base_trajectories();

Dataset sample(const DistributionSpec& spec, Index n, std::uint64_t seed);

/// Same stream as sample(); additionally reports which mixture component,
/// moon, or base path produced each row.
Dataset sample(const DistributionSpec& spec, Index n, std::uint64_t seed,
               std::vector<int>& labels_out);

bool has_true_log_density(const DistributionSpec& spec);

/// Exact mixture log-density, or nullopt for the kinds without a closed form
/// (two moons and both trajectory variants).
std::optional<Real> true_log_density(const DistributionSpec& spec,
                                     const RowVector& x);

}  // namespace rome::distributions

// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <utility>
#include <vector>

#include "rome/types.hpp"

namespace rome::optics {

/// Greedy reachability ordering. `order` is a permutation of the original
/// sample indices; `reach[i]` is the reachability distance recorded when
/// order[i] joined (reach[0] is +infinity).
struct ReachabilityOrdering {
  std::vector<Index> order;
  Vector reach;
  int k_used = 0;
};

/// Disjoint clusters plus a noise set, together partitioning {0..N-1}.
/// `score` is the silhouette value, or the -1.1 sentinel for the default
/// single-cluster set.
struct ClusterSet {
  std::vector<std::vector<Index>> clusters;
  std::vector<Index> noise;
  Real score = -1.1;

  Index total_size() const;
};

/// Smoothing count k_c = min(k_max, max(k_min, n*m/alpha_k)), rounded to the
/// nearest integer and clamped so it never reaches n.
int core_smoothing_k(Index n, Index m, int k_min, int k_max, Real alpha_k);

Matrix pairwise_distances(const Matrix& points);

ReachabilityOrdering reachability_analysis(const Matrix& points, int k);

ClusterSet extract_dbscan(const ReachabilityOrdering& ordering, Real eps);
ClusterSet extract_xi(const ReachabilityOrdering& ordering, Real xi);

struct CandidateGrids {
  std::vector<Real> eps;  // 100 values, quadratically spaced over finite reach
  std::vector<Real> xi;   // 0.01 .. 0.99
};

CandidateGrids candidate_grids(const ReachabilityOrdering& ordering);

/// Mean silhouette with the noise set counted as one label; singleton labels
/// contribute 0; fewer than two labels yields the -1.1 sentinel.
Real silhouette(const Matrix& points, const ClusterSet& clusters);
Real silhouette_from_distances(const Matrix& distances,
                               const ClusterSet& clusters);

/// Scans all 199 candidate extractions (eps grid first, then xi grid) and
/// returns the strictly best scorer; the single all-samples cluster at the
/// sentinel score is the starting default.
ClusterSet select_clustering(const Matrix& points,
                             const ReachabilityOrdering& ordering);

namespace detail {
/// Contiguous position runs [first, last] in the ordering that qualify as
/// clusters; everything outside the runs is noise.
std::vector<std::pair<Index, Index>> dbscan_runs(const Vector& reach, Real eps);
std::vector<std::pair<Index, Index>> xi_runs(const Vector& reach, Real xi);
ClusterSet materialize(const ReachabilityOrdering& ordering,
                       const std::vector<std::pair<Index, Index>>& runs);
}  // namespace detail

}  // namespace rome::optics

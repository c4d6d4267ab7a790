// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rome::optics {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kSentinelScore = -1.1;
}  // namespace

Index ClusterSet::total_size() const {
  Index n = static_cast<Index>(noise.size());
  for (const auto& c : clusters) n += static_cast<Index>(c.size());
  return n;
}

int core_smoothing_k(Index n, Index m, int k_min, int k_max, Real alpha_k) {
  if (n < 2) throw InsufficientDataError("need at least 2 samples");
  if (k_min < 1 || k_max < k_min || alpha_k <= 0) {
    throw ConfigError("invalid smoothing parameters");
  }
  const Real raw = static_cast<Real>(n) * static_cast<Real>(m) / alpha_k;
  const Real bounded =
      std::min(static_cast<Real>(k_max), std::max(static_cast<Real>(k_min), raw));
  long k = std::lround(bounded);
  const long hi = std::min<long>(k_max, n - 1);
  const long lo = std::min<long>(k_min, hi);
  return static_cast<int>(std::clamp(k, lo, hi));
}

Matrix pairwise_distances(const Matrix& points) {
  const Index n = points.rows();
  Matrix d(n, n);
  d.diagonal().setZero();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Real v = (points.row(i) - points.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

Index lexicographic_smallest_row(const Matrix& points) {
  Index best = 0;
  for (Index i = 1; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j) {
      const Real a = points(i, j), b = points(best, j);
      if (a < b) {
        best = i;
        break;
      }
      if (a > b) break;
    }
  }
  return best;
}

}  // namespace

ReachabilityOrdering reachability_analysis(const Matrix& points, int k) {
  const Index n = points.rows();
  if (n < 2) throw InsufficientDataError("need at least 2 samples");
  if (k < 1 || k > n - 1) throw ConfigError("k out of range");
  if (!points.allFinite()) throw DataError("non-finite input sample");

  const Matrix dist = pairwise_distances(points);

  // core distance: k-th smallest distance from each point to the others
  Vector core(n);
  std::vector<Real> buf(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) buf[w++] = dist(i, j);
    }
    std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end());
    core(i) = buf[static_cast<std::size_t>(k - 1)];
  }

  ReachabilityOrdering out;
  out.k_used = k;
  out.order.reserve(static_cast<std::size_t>(n));
  out.reach.resize(n);

  const Index start = lexicographic_smallest_row(points);
  std::vector<bool> included(static_cast<std::size_t>(n), false);
  Vector min_dist = dist.col(start);
  included[static_cast<std::size_t>(start)] = true;
  out.order.push_back(start);
  out.reach(0) = kInf;

  for (Index step = 1; step < n; ++step) {
    Index best = -1;
    Real best_r = kInf;
    for (Index j = 0; j < n; ++j) {
      if (included[static_cast<std::size_t>(j)]) continue;
      const Real r = std::max(core(j), min_dist(j));
      if (r < best_r) {
        best_r = r;
        best = j;
      }
    }
    included[static_cast<std::size_t>(best)] = true;
    out.order.push_back(best);
    out.reach(step) = best_r;
    for (Index j = 0; j < n; ++j) {
      if (!included[static_cast<std::size_t>(j)] && dist(best, j) < min_dist(j)) {
        min_dist(j) = dist(best, j);
      }
    }
  }
  return out;
}

namespace detail {

std::vector<std::pair<Index, Index>> dbscan_runs(const Vector& reach,
                                                 Real eps) {
  // Positions with reach >= eps start a new run; the boundary condition
  // eps <= r_bound then holds automatically at both run edges.
  const Index n = reach.size();
  std::vector<std::pair<Index, Index>> runs;
  Index start = 0;
  for (Index pos = 1; pos <= n; ++pos) {
    if (pos == n || reach(pos) >= eps) {
      if (pos - start >= 2) runs.emplace_back(start, pos - 1);
      start = pos;
    }
  }
  return runs;
}

std::vector<std::pair<Index, Index>> xi_runs(const Vector& reach, Real xi) {
  const Index n = reach.size();
  // Boundary reach values for r_bound; infinities (the first entry and the
  // one-past-the-end sentinel) are replaced by the largest finite reach so
  // that the proportional condition stays meaningful at the edges.
  Real max_finite = 0;
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(reach(i))) max_finite = std::max(max_finite, reach(i));
  }
  Vector bound(n + 1);
  for (Index i = 0; i < n; ++i) {
    bound(i) = std::isfinite(reach(i)) ? reach(i) : max_finite;
  }
  bound(n) = max_finite;

  const Real t = 1.0 - xi;
  std::vector<std::pair<Index, Index>> runs;
  Index a = 0;
  while (a < n) {
    // longest qualifying run starting at a; nested runs are absorbed into it
    Index best = -1;
    Real interior_max = 0;
    for (Index b = a + 1; b < n; ++b) {
      interior_max = std::max(interior_max, reach(b));
      if (interior_max > t * bound(a)) break;
      if (interior_max <= t * bound(b + 1)) best = b;
    }
    if (best >= a + 1) {
      runs.emplace_back(a, best);
      a = best + 1;
    } else {
      ++a;
    }
  }
  return runs;
}

ClusterSet materialize(const ReachabilityOrdering& ordering,
                       const std::vector<std::pair<Index, Index>>& runs) {
  const Index n = static_cast<Index>(ordering.order.size());
  ClusterSet cs;
  std::vector<bool> assigned(static_cast<std::size_t>(n), false);
  for (const auto& [first, last] : runs) {
    std::vector<Index> members;
    members.reserve(static_cast<std::size_t>(last - first + 1));
    for (Index pos = first; pos <= last; ++pos) {
      members.push_back(ordering.order[static_cast<std::size_t>(pos)]);
      assigned[static_cast<std::size_t>(pos)] = true;
    }
    cs.clusters.push_back(std::move(members));
  }
  for (Index pos = 0; pos < n; ++pos) {
    if (!assigned[static_cast<std::size_t>(pos)]) {
      cs.noise.push_back(ordering.order[static_cast<std::size_t>(pos)]);
    }
  }
  std::sort(cs.noise.begin(), cs.noise.end());
  return cs;
}

}  // namespace detail

ClusterSet extract_dbscan(const ReachabilityOrdering& ordering, Real eps) {
  if (!(eps > 0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be positive and finite");
  }
  return detail::materialize(ordering, detail::dbscan_runs(ordering.reach, eps));
}

ClusterSet extract_xi(const ReachabilityOrdering& ordering, Real xi) {
  if (!(xi > 0) || !(xi < 1)) throw ConfigError("xi must be in (0, 1)");
  return detail::materialize(ordering, detail::xi_runs(ordering.reach, xi));
}

CandidateGrids candidate_grids(const ReachabilityOrdering& ordering) {
  Real lo = kInf, hi = -kInf;
  for (Index i = 0; i < ordering.reach.size(); ++i) {
    const Real r = ordering.reach(i);
    if (std::isfinite(r)) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  if (!std::isfinite(lo)) {
    throw InsufficientDataError("no finite reachability values");
  }
  CandidateGrids grids;
  grids.eps.reserve(100);
  for (int alpha = 0; alpha < 100; ++alpha) {
    const Real f = static_cast<Real>(alpha) / 99.0;
    grids.eps.push_back(lo + f * f * (hi - lo));
  }
  grids.xi.reserve(99);
  for (int beta = 1; beta <= 99; ++beta) {
    grids.xi.push_back(static_cast<Real>(beta) / 100.0);
  }
  return grids;
}

namespace {

std::vector<int> label_array(const ClusterSet& cs, Index n, int& num_labels) {
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (const auto& cluster : cs.clusters) {
    for (Index idx : cluster) {
      if (idx < 0 || idx >= n || labels[static_cast<std::size_t>(idx)] != -1) {
        throw DataError("cluster set does not partition the samples");
      }
      labels[static_cast<std::size_t>(idx)] = next;
    }
    ++next;
  }
  bool has_noise = false;
  for (Index idx : cs.noise) {
    if (idx < 0 || idx >= n || labels[static_cast<std::size_t>(idx)] != -1) {
      throw DataError("cluster set does not partition the samples");
    }
    labels[static_cast<std::size_t>(idx)] = next;
    has_noise = true;
  }
  for (int l : labels) {
    if (l == -1) throw DataError("cluster set does not cover all samples");
  }
  num_labels = next + (has_noise ? 1 : 0);
  return labels;
}

}  // namespace

Real silhouette_from_distances(const Matrix& distances,
                               const ClusterSet& clusters) {
  const Index n = distances.rows();
  int num_labels = 0;
  const std::vector<int> labels = label_array(clusters, n, num_labels);
  if (num_labels < 2) return kSentinelScore;

  std::vector<Index> counts(static_cast<std::size_t>(num_labels), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];

  Real total = 0;
  std::vector<Real> sums(static_cast<std::size_t>(num_labels));
  for (Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
          distances(i, j);
    }
    const int own = labels[static_cast<std::size_t>(i)];
    const Index own_count = counts[static_cast<std::size_t>(own)];
    if (own_count <= 1) continue;  // singleton label contributes 0
    const Real a = sums[static_cast<std::size_t>(own)] /
                   static_cast<Real>(own_count - 1);
    Real b = kInf;
    for (int l = 0; l < num_labels; ++l) {
      if (l == own) continue;
      b = std::min(b, sums[static_cast<std::size_t>(l)] /
                          static_cast<Real>(counts[static_cast<std::size_t>(l)]));
    }
    const Real denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<Real>(n);
}

Real silhouette(const Matrix& points, const ClusterSet& clusters) {
  return silhouette_from_distances(pairwise_distances(points), clusters);
}

ClusterSet select_clustering(const Matrix& points,
                             const ReachabilityOrdering& ordering) {
  const Index n = points.rows();
  ClusterSet best;
  best.clusters.emplace_back();
  best.clusters.front().reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) best.clusters.front().push_back(i);
  best.score = kSentinelScore;

  const Matrix dist = pairwise_distances(points);
  const CandidateGrids grids = candidate_grids(ordering);

  // Many grid values produce the same position runs; score each distinct
  // partition once.
  std::map<std::vector<std::pair<Index, Index>>, Real> scored;
  auto consider = [&](std::vector<std::pair<Index, Index>> runs) {
    auto it = scored.find(runs);
    Real score;
    if (it != scored.end()) {
      score = it->second;
    } else {
      score = silhouette_from_distances(
          dist, detail::materialize(ordering, runs));
      scored.emplace(runs, score);
    }
    if (score > best.score) {
      best = detail::materialize(ordering, runs);
      best.score = score;
    }
  };

  for (Real eps : grids.eps) {
    if (eps > 0) consider(detail::dbscan_runs(ordering.reach, eps));
  }
  for (Real xi : grids.xi) {
    consider(detail::xi_runs(ordering.reach, xi));
  }
  return best;
}

}  // namespace rome::optics

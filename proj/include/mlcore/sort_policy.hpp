#ifndef MLCORE_SORT_POLICY_HPP
#define MLCORE_SORT_POLICY_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>

#include "mlcore/hrect_bound.hpp"
#include "mlcore/metrics.hpp"

namespace mlcore {

// The nearest/furthest duality as a compile-time policy.  A policy defines
// what "better" means (ties always break toward the smaller point index),
// the sentinel for "no candidate yet", and which side of a bound can still
// beat the current k-th best.  Candidate values and prune thresholds are
// power-domain distances; cover-tree bounds are formed in true distance
// and converted with pow_abs, which is monotone, so prune decisions agree
// with true-distance comparisons.

struct NearestNeighborSort {
  static constexpr const char* name() { return "nearest"; }

  // A partial power-domain sum already above the threshold can only grow,
  // so distance accumulation may stop early.
  static constexpr bool kBoundedDistance = true;

  static constexpr double worst_raw() {
    return std::numeric_limits<double>::infinity();
  }

  static bool is_better(double a, std::size_t ia, double b, std::size_t ib) {
    return a < b || (a == b && ia < ib);
  }

  // Candidate ordering on bound scores alone (for traversal order).
  static bool score_precedes(double a, double b) { return a < b; }

  // A subtree whose best achievable value is bound_raw cannot contribute
  // once it is strictly worse than the k-th best; equal values may still
  // win on the index tie-break, so they are never pruned.
  static bool prunable(double bound_raw, double kth_raw) {
    return bound_raw > kth_raw;
  }

  template <MetricPolicy M>
  static double point_bound_raw(const HRectBound& b, std::span<const double> q,
                                const M& metric) {
    return min_dist_point_raw(b, q, metric);
  }
  // Same bound but abandoned once the partial sum settles the prune
  // decision against `limit`: the return value then only promises to be
  // on the same side of `limit` as the full bound.
  template <MetricPolicy M>
  static double point_bound_raw_above(const HRectBound& b,
                                      std::span<const double> q,
                                      const M& metric, double limit) {
    double s = 0.0;
    for (std::size_t j = 0; j < b.dim(); ++j) {
      double excess = 0.0;
      if (q[j] < b.lo(j)) {
        excess = b.lo(j) - q[j];
      } else if (q[j] > b.hi(j)) {
        excess = q[j] - b.hi(j);
      }
      if (excess != 0.0) {
        s += metric.pow_abs(excess);
        if (s > limit) return s;
      }
    }
    return s;
  }
  template <MetricPolicy M>
  static double pair_bound_raw(const HRectBound& a, const HRectBound& b,
                               const M& metric) {
    return min_dist_bound_raw(a, b, metric);
  }

  static double cover_bound(double d, double fdd) {
    return std::max(0.0, d - fdd);
  }
  static double cover_pair_bound(double d, double qfdd, double rfdd) {
    return std::max(0.0, d - qfdd - rfdd);
  }

  // Combines per-query thresholds over a query subtree: the prune test
  // must hold for the least satisfied query.
  static double aggregate(double a, double b) { return std::max(a, b); }
};

struct FurthestNeighborSort {
  static constexpr const char* name() { return "furthest"; }

  // Partial sums approach the candidate value from below; early
  // abandonment is unsound when larger is better.
  static constexpr bool kBoundedDistance = false;

  static constexpr double worst_raw() { return 0.0; }

  static bool is_better(double a, std::size_t ia, double b, std::size_t ib) {
    return a > b || (a == b && ia < ib);
  }

  static bool score_precedes(double a, double b) { return a > b; }

  static bool prunable(double bound_raw, double kth_raw) {
    return bound_raw < kth_raw;
  }

  template <MetricPolicy M>
  static double point_bound_raw(const HRectBound& b, std::span<const double> q,
                                const M& metric) {
    return max_dist_point_raw(b, q, metric);
  }
  // Max-distance terms only grow, so once the partial sum passes `limit`
  // the node is already known to be unprunable.
  template <MetricPolicy M>
  static double point_bound_raw_above(const HRectBound& b,
                                      std::span<const double> q,
                                      const M& metric, double limit) {
    double s = 0.0;
    for (std::size_t j = 0; j < b.dim(); ++j) {
      const double to_lo = std::fabs(q[j] - b.lo(j));
      const double to_hi = std::fabs(b.hi(j) - q[j]);
      s += metric.pow_abs(std::max(to_lo, to_hi));
      if (s > limit) return s;
    }
    return s;
  }
  template <MetricPolicy M>
  static double pair_bound_raw(const HRectBound& a, const HRectBound& b,
                               const M& metric) {
    return max_dist_bound_raw(a, b, metric);
  }

  static double cover_bound(double d, double fdd) { return d + fdd; }
  static double cover_pair_bound(double d, double qfdd, double rfdd) {
    return d + qfdd + rfdd;
  }

  static double aggregate(double a, double b) { return std::min(a, b); }
};

}  // namespace mlcore

#endif  // MLCORE_SORT_POLICY_HPP

#ifndef MLCORE_HRECT_BOUND_HPP
#define MLCORE_HRECT_BOUND_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mlcore/metrics.hpp"

namespace mlcore {

/// Axis-aligned bounding hyperrectangle: a closed interval [lo_j, hi_j]
/// per dimension.  kd-tree nodes keep the tight hull of their subtree's
/// points, which makes every Lp bound below exact rather than a heuristic.
class HRectBound {
 public:
  explicit HRectBound(std::size_t dim)
      : lo_(dim, std::numeric_limits<double>::infinity()),
        hi_(dim, -std::numeric_limits<double>::infinity()) {}

  std::size_t dim() const { return lo_.size(); }
  double lo(std::size_t j) const { return lo_[j]; }
  double hi(std::size_t j) const { return hi_[j]; }

  void grow(std::span<const double> point) {
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      lo_[j] = std::min(lo_[j], point[j]);
      hi_[j] = std::max(hi_[j], point[j]);
    }
  }

  bool contains(std::span<const double> point) const {
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      if (point[j] < lo_[j] || point[j] > hi_[j]) return false;
    }
    return true;
  }

  bool operator==(const HRectBound&) const = default;

 private:
  std::vector<double> lo_, hi_;
};

// Power-domain bounds (no final root applied).  For Lp metrics these are
// exact: the returned value is attained by some point of the box (or pair
// of boxes), not merely a bound.

template <MetricPolicy M>
double min_dist_point_raw(const HRectBound& b, std::span<const double> q,
                          const M& metric) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.dim(); ++j) {
    double excess = 0.0;
    if (q[j] < b.lo(j)) {
      excess = b.lo(j) - q[j];
    } else if (q[j] > b.hi(j)) {
      excess = q[j] - b.hi(j);
    }
    if (excess != 0.0) s += metric.pow_abs(excess);
  }
  return s;
}

template <MetricPolicy M>
double max_dist_point_raw(const HRectBound& b, std::span<const double> q,
                          const M& metric) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.dim(); ++j) {
    const double to_lo = std::fabs(q[j] - b.lo(j));
    const double to_hi = std::fabs(b.hi(j) - q[j]);
    s += metric.pow_abs(std::max(to_lo, to_hi));
  }
  return s;
}

template <MetricPolicy M>
double min_dist_bound_raw(const HRectBound& a, const HRectBound& b,
                          const M& metric) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    double gap = 0.0;
    if (a.lo(j) > b.hi(j)) {
      gap = a.lo(j) - b.hi(j);
    } else if (b.lo(j) > a.hi(j)) {
      gap = b.lo(j) - a.hi(j);
    }
    if (gap != 0.0) s += metric.pow_abs(gap);
  }
  return s;
}

template <MetricPolicy M>
double max_dist_bound_raw(const HRectBound& a, const HRectBound& b,
                          const M& metric) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double span1 = std::fabs(a.hi(j) - b.lo(j));
    const double span2 = std::fabs(b.hi(j) - a.lo(j));
    s += metric.pow_abs(std::max(span1, span2));
  }
  return s;
}

/// Lower bound on d(q, x) over all x inside the bound; 0 iff q is inside.
template <MetricPolicy M>
double min_dist_point(const HRectBound& b, std::span<const double> q,
                      const M& metric) {
  detail::check_same_dim(b.dim(), q.size(), "min_dist_point");
  return metric.root(min_dist_point_raw(b, q, metric));
}

/// Upper bound on d(q, x) over all x inside the bound (farthest corner).
template <MetricPolicy M>
double max_dist_point(const HRectBound& b, std::span<const double> q,
                      const M& metric) {
  detail::check_same_dim(b.dim(), q.size(), "max_dist_point");
  return metric.root(max_dist_point_raw(b, q, metric));
}

/// Lower bound on d(x, y) over x in a, y in b; 0 iff the bounds overlap
/// in every dimension.
template <MetricPolicy M>
double min_dist_bound(const HRectBound& a, const HRectBound& b,
                      const M& metric) {
  detail::check_same_dim(a.dim(), b.dim(), "min_dist_bound");
  return metric.root(min_dist_bound_raw(a, b, metric));
}

/// Upper bound on d(x, y) over x in a, y in b.
template <MetricPolicy M>
double max_dist_bound(const HRectBound& a, const HRectBound& b,
                      const M& metric) {
  detail::check_same_dim(a.dim(), b.dim(), "max_dist_bound");
  return metric.root(max_dist_bound_raw(a, b, metric));
}

}  // namespace mlcore

#endif  // MLCORE_HRECT_BOUND_HPP

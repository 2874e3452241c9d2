#ifndef MLCORE_METRICS_HPP
#define MLCORE_METRICS_HPP

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace mlcore {

// Metric policies for the Lp family.  Distances are evaluated in two
// stages so searches can compare values before the final root is taken:
//
//   raw_distance(a, b) = sum_j pow_abs(a_j - b_j)      ("power domain")
//   distance(a, b)     = root(raw_distance(a, b))
//
// pow_abs/root are exact inverses on non-negative reals, so power-domain
// comparisons order candidates exactly as true distances do.  All bound
// computations reuse the same two hooks, which keeps kd-tree pruning exact
// for every Lp metric.

namespace detail {

inline void check_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch: " +
                                std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace detail

template <typename M>
concept MetricPolicy = requires(const M m, double x, std::span<const double> v) {
  { m.pow_abs(x) } -> std::convertible_to<double>;
  { m.root(x) } -> std::convertible_to<double>;
  { m.distance(v, v) } -> std::convertible_to<double>;
};

/// Standard Euclidean (L2) metric.
struct EuclideanMetric {
  static constexpr const char* name() { return "l2"; }
  double pow_abs(double x) const { return x * x; }
  double root(double s) const { return std::sqrt(s); }

  double raw_distance(const double* a, const double* b, std::size_t n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = a[i] - b[i];
      s += t * t;
    }
    return s;
  }

  // Accumulation with early abandonment: once the partial sum exceeds
  // `limit` the exact value no longer matters and the partial (already
  // > limit) is returned.
  double raw_distance_above(const double* a, const double* b, std::size_t n,
                            double limit) const {
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const double t0 = a[i] - b[i];
      const double t1 = a[i + 1] - b[i + 1];
      const double t2 = a[i + 2] - b[i + 2];
      const double t3 = a[i + 3] - b[i + 3];
      s += t0 * t0 + t1 * t1 + t2 * t2 + t3 * t3;
      if (s > limit) return s;
    }
    for (; i < n; ++i) {
      const double t = a[i] - b[i];
      s += t * t;
    }
    return s;
  }
  double raw_distance(std::span<const double> a,
                      std::span<const double> b) const {
    return raw_distance(a.data(), b.data(), a.size());
  }
  double distance(std::span<const double> a, std::span<const double> b) const {
    detail::check_same_dim(a.size(), b.size(), "EuclideanMetric::distance");
    return root(raw_distance(a, b));
  }
};

/// Manhattan (L1) metric.
struct ManhattanMetric {
  static constexpr const char* name() { return "l1"; }
  double pow_abs(double x) const { return std::fabs(x); }
  double root(double s) const { return s; }

  double raw_distance(const double* a, const double* b, std::size_t n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
  }
  double raw_distance_above(const double* a, const double* b, std::size_t n,
                            double limit) const {
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      s += std::fabs(a[i] - b[i]) + std::fabs(a[i + 1] - b[i + 1]) +
           std::fabs(a[i + 2] - b[i + 2]) + std::fabs(a[i + 3] - b[i + 3]);
      if (s > limit) return s;
    }
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
  }
  double raw_distance(std::span<const double> a,
                      std::span<const double> b) const {
    return raw_distance(a.data(), b.data(), a.size());
  }
  double distance(std::span<const double> a, std::span<const double> b) const {
    detail::check_same_dim(a.size(), b.size(), "ManhattanMetric::distance");
    return root(raw_distance(a, b));
  }
};

/// General Lp metric for runtime p >= 1.
class LpMetric {
 public:
  explicit LpMetric(double p) : p_(p) {
    if (!(p >= 1.0)) {
      throw std::invalid_argument("LpMetric: p must be >= 1, got " +
                                  std::to_string(p));
    }
  }

  double p() const { return p_; }
  double pow_abs(double x) const { return std::pow(std::fabs(x), p_); }
  double root(double s) const { return std::pow(s, 1.0 / p_); }

  double raw_distance(const double* a, const double* b, std::size_t n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += pow_abs(a[i] - b[i]);
    return s;
  }
  double raw_distance_above(const double* a, const double* b, std::size_t n,
                            double limit) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += pow_abs(a[i] - b[i]);
      if (s > limit) return s;
    }
    return s;
  }
  double raw_distance(std::span<const double> a,
                      std::span<const double> b) const {
    return raw_distance(a.data(), b.data(), a.size());
  }
  double distance(std::span<const double> a, std::span<const double> b) const {
    detail::check_same_dim(a.size(), b.size(), "LpMetric::distance");
    return root(raw_distance(a, b));
  }

 private:
  double p_;
};

/// Lp distance between two points.  Dispatches to the exact L1/L2 kernels
/// for p in {1, 2}.
inline double lp_distance(std::span<const double> a, std::span<const double> b,
                          double p) {
  detail::check_same_dim(a.size(), b.size(), "lp_distance");
  if (p == 1.0) return ManhattanMetric{}.distance(a, b);
  if (p == 2.0) return EuclideanMetric{}.distance(a, b);
  return LpMetric(p).distance(a, b);
}

}  // namespace mlcore

#endif  // MLCORE_METRICS_HPP

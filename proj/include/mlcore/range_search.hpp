#ifndef MLCORE_RANGE_SEARCH_HPP
#define MLCORE_RANGE_SEARCH_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlcore/cover_tree.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/matrix.hpp"
#include "mlcore/metrics.hpp"

namespace mlcore {

/// Per-query lists of (reference index, distance) with low <= distance <=
/// high, sorted by ascending reference index.
struct RangeResult {
  std::vector<std::vector<std::pair<std::size_t, double>>> matches;
};

namespace detail {

inline void check_range_args(double low, double high) {
  if (!(low >= 0.0) || !(high >= low)) {
    throw std::invalid_argument("range search: need 0 <= low <= high");
  }
}

template <MetricPolicy M>
void kd_range_query(const KdTree& tree, std::span<const double> qrow,
                    std::size_t self_id, double low, double high,
                    const M& metric,
                    std::vector<std::pair<std::size_t, double>>& out) {
  const DataMatrix& ref = tree.data();
  const std::size_t dim = ref.cols();
  const double* qp = qrow.data();

  auto visit = [&](auto&& self_fn, std::size_t id) -> void {
    const KdTree::Node& n = tree.node(id);
    if (metric.root(min_dist_point_raw(n.bound, qrow, metric)) > high) return;
    if (metric.root(max_dist_point_raw(n.bound, qrow, metric)) < low) return;
    if (n.is_leaf()) {
      for (std::size_t t = n.begin; t < n.begin + n.count; ++t) {
        const std::size_t pid = tree.point_id(t);
        if (pid == self_id) continue;
        const double d =
            metric.root(metric.raw_distance(qp, ref.row_ptr(pid), dim));
        if (d >= low && d <= high) out.emplace_back(pid, d);
      }
      return;
    }
    self_fn(self_fn, n.left);
    self_fn(self_fn, n.right);
  };
  visit(visit, tree.root());
  std::sort(out.begin(), out.end());
}

template <MetricPolicy M>
void cover_range_query(const CoverTree<M>& tree, std::span<const double> qrow,
                       std::size_t self_id, double low, double high,
                       std::vector<std::pair<std::size_t, double>>& out) {
  const M& metric = tree.metric();
  const DataMatrix& ref = tree.data();
  const std::size_t dim = ref.cols();
  const double* qp = qrow.data();

  auto visit = [&](auto&& self_fn, std::size_t id, double d) -> void {
    const auto& n = tree.node(id);
    if (d - n.fdd > high || d + n.fdd < low) return;
    if (n.is_leaf()) {
      if (n.point != self_id && d >= low && d <= high) {
        out.emplace_back(n.point, d);
      }
      return;
    }
    for (std::size_t c : n.children) {
      const auto& child = tree.node(c);
      const double dc =
          child.point == n.point
              ? d
              : metric.root(
                    metric.raw_distance(qp, ref.row_ptr(child.point), dim));
      self_fn(self_fn, c, dc);
    }
  };
  const auto& root = tree.node(tree.root());
  visit(visit, tree.root(),
        metric.root(metric.raw_distance(qp, ref.row_ptr(root.point), dim)));
  std::sort(out.begin(), out.end());
}

}  // namespace detail

template <MetricPolicy M = EuclideanMetric>
RangeResult range_search(const KdTree& tree, const DataMatrix& query,
                         double low, double high, const M& metric = {}) {
  detail::check_range_args(low, high);
  detail::check_same_dim(tree.data().cols(), query.cols(), "range search");
  RangeResult res;
  res.matches.resize(query.rows());
  for (std::size_t q = 0; q < query.rows(); ++q) {
    detail::kd_range_query(tree, query.row(q), KdTree::npos, low, high, metric,
                           res.matches[q]);
  }
  return res;
}

template <MetricPolicy M = EuclideanMetric>
RangeResult range_search_self(const KdTree& tree, double low, double high,
                              const M& metric = {}) {
  detail::check_range_args(low, high);
  const DataMatrix& data = tree.data();
  RangeResult res;
  res.matches.resize(data.rows());
  for (std::size_t q = 0; q < data.rows(); ++q) {
    detail::kd_range_query(tree, data.row(q), q, low, high, metric,
                           res.matches[q]);
  }
  return res;
}

template <MetricPolicy M>
RangeResult range_search(const CoverTree<M>& tree, const DataMatrix& query,
                         double low, double high) {
  detail::check_range_args(low, high);
  detail::check_same_dim(tree.data().cols(), query.cols(), "range search");
  RangeResult res;
  res.matches.resize(query.rows());
  for (std::size_t q = 0; q < query.rows(); ++q) {
    detail::cover_range_query(tree, query.row(q), CoverTree<M>::npos, low,
                              high, res.matches[q]);
  }
  return res;
}

template <MetricPolicy M>
RangeResult range_search_self(const CoverTree<M>& tree, double low,
                              double high) {
  detail::check_range_args(low, high);
  const DataMatrix& data = tree.data();
  RangeResult res;
  res.matches.resize(data.rows());
  for (std::size_t q = 0; q < data.rows(); ++q) {
    detail::cover_range_query(tree, data.row(q), q, low, high, res.matches[q]);
  }
  return res;
}

}  // namespace mlcore

#endif  // MLCORE_RANGE_SEARCH_HPP

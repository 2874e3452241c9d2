#ifndef MLCORE_NEIGHBOR_SEARCH_HPP
#define MLCORE_NEIGHBOR_SEARCH_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlcore/cover_tree.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/matrix.hpp"
#include "mlcore/metrics.hpp"
#include "mlcore/sort_policy.hpp"

namespace mlcore {

enum class Traversal { kSingle, kDual, kNaive };

/// Per-query neighbor lists, row-major m-by-k.  Row i is sorted best-first
/// under the sort policy that produced it; distances are true (rooted)
/// metric distances, recomputable from the indices.
struct NeighborResult {
  std::size_t query_count = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t index(std::size_t q, std::size_t j) const {
    return indices[q * k + j];
  }
  double distance(std::size_t q, std::size_t j) const {
    return distances[q * k + j];
  }
};

namespace detail {

// Bounded best-k candidate list per query, kept sorted best-first.
// Values are power-domain distances; a candidate displaces the current
// k-th best only when strictly better (index tie-break included).
template <class Policy>
class CandidateList {
 public:
  CandidateList(std::size_t queries, std::size_t k)
      : k_(k),
        raws_(queries * k, Policy::worst_raw()),
        ids_(queries * k, std::size_t(-1)),
        sizes_(queries, 0) {}

  bool update(std::size_t q, double raw, std::size_t id) {
    double* r = raws_.data() + q * k_;
    std::size_t* x = ids_.data() + q * k_;
    std::size_t& sz = sizes_[q];
    std::size_t pos;
    if (sz < k_) {
      pos = sz++;
    } else {
      if (!Policy::is_better(raw, id, r[k_ - 1], x[k_ - 1])) return false;
      pos = k_ - 1;
    }
    while (pos > 0 && Policy::is_better(raw, id, r[pos - 1], x[pos - 1])) {
      r[pos] = r[pos - 1];
      x[pos] = x[pos - 1];
      --pos;
    }
    r[pos] = raw;
    x[pos] = id;
    return true;
  }

  // Prune threshold: the k-th best value, or the policy sentinel while the
  // list is not yet full (which disables pruning).
  double kth_raw(std::size_t q) const {
    return sizes_[q] == k_ ? raws_[q * k_ + k_ - 1] : Policy::worst_raw();
  }

  std::size_t query_count() const { return sizes_.size(); }
  std::size_t k() const { return k_; }
  double raw(std::size_t q, std::size_t j) const { return raws_[q * k_ + j]; }
  std::size_t id(std::size_t q, std::size_t j) const {
    return ids_[q * k_ + j];
  }

  template <MetricPolicy M>
  NeighborResult finalize(const M& metric) const {
    NeighborResult res;
    res.query_count = sizes_.size();
    res.k = k_;
    res.indices = ids_;
    res.distances.resize(raws_.size());
    for (std::size_t i = 0; i < raws_.size(); ++i) {
      res.distances[i] = metric.root(raws_[i]);
    }
    return res;
  }

 private:
  std::size_t k_;
  std::vector<double> raws_;
  std::vector<std::size_t> ids_;
  std::vector<std::size_t> sizes_;
};

// Traversal instrumentation for prune-soundness checks.  single holds
// (query index, pruned node id); dual holds (query node id, pruned
// reference node id).
struct PruneLog {
  std::vector<std::pair<std::size_t, std::size_t>> single;
  std::vector<std::pair<std::size_t, std::size_t>> dual;
};

template <class Policy, MetricPolicy M>
void naive_search(const DataMatrix& ref, const DataMatrix& query, bool self,
                  CandidateList<Policy>& cands, const M& metric) {
  const std::size_t dim = ref.cols();
  for (std::size_t q = 0; q < query.rows(); ++q) {
    const double* qp = query.row_ptr(q);
    for (std::size_t id = 0; id < ref.rows(); ++id) {
      if (self && id == q) continue;
      cands.update(q, metric.raw_distance(qp, ref.row_ptr(id), dim), id);
    }
  }
}

// Scans one leaf for one query, early-abandoning distance sums against
// the current k-th bound when the policy allows it.
template <class Policy, MetricPolicy M>
inline void scan_leaf(const KdTree& tree, const KdTree::Node& n,
                      const double* qp, std::size_t q, bool self,
                      CandidateList<Policy>& cands, const M& metric,
                      std::size_t dim) {
  double kth = cands.kth_raw(q);
  for (std::size_t t = n.begin; t < n.begin + n.count; ++t) {
    const std::size_t pid = tree.point_id(t);
    if (self && pid == q) continue;
    double raw;
    if constexpr (Policy::kBoundedDistance) {
      raw = metric.raw_distance_above(qp, tree.data().row_ptr(pid), dim, kth);
    } else {
      raw = metric.raw_distance(qp, tree.data().row_ptr(pid), dim);
    }
    if (cands.update(q, raw, pid)) kth = cands.kth_raw(q);
  }
}

template <class Policy, MetricPolicy M>
void kd_search_single(const KdTree& tree, const DataMatrix& query, bool self,
                      CandidateList<Policy>& cands, const M& metric,
                      PruneLog* log = nullptr) {
  const std::size_t dim = tree.data().cols();

  for (std::size_t q = 0; q < query.rows(); ++q) {
    const auto qrow = query.row(q);
    const double* qp = qrow.data();

    auto visit = [&](auto&& self_fn, std::size_t id, double score) -> void {
      if (Policy::prunable(score, cands.kth_raw(q))) {
        if (log) log->single.emplace_back(q, id);
        return;
      }
      const KdTree::Node& n = tree.node(id);
      if (n.is_leaf()) {
        scan_leaf(tree, n, qp, q, self, cands, metric, dim);
        return;
      }
      const double sl =
          Policy::point_bound_raw(tree.node(n.left).bound, qrow, metric);
      const double sr =
          Policy::point_bound_raw(tree.node(n.right).bound, qrow, metric);
      if (Policy::score_precedes(sr, sl)) {
        self_fn(self_fn, n.right, sr);
        self_fn(self_fn, n.left, sl);
      } else {
        self_fn(self_fn, n.left, sl);
        self_fn(self_fn, n.right, sr);
      }
    };
    visit(visit, tree.root(),
          Policy::point_bound_raw(tree.node(tree.root()).bound, qrow, metric));
  }
}

// Dual traversal with the query side expanded first: each query leaf then
// descends the reference tree once, pruning (query leaf, reference node)
// pairs whose bound-to-bound distance cannot improve any of the leaf's
// queries.  The leaf's aggregate threshold is refreshed after every base
// case, and reference children are visited best bound first so thresholds
// tighten early.
template <class Policy, MetricPolicy M>
void kd_search_dual(const KdTree& rtree, const KdTree& qtree,
                    const DataMatrix& query, bool self,
                    CandidateList<Policy>& cands, const M& metric,
                    PruneLog* log = nullptr) {
  const std::size_t dim = rtree.data().cols();
  // Stale-safe per-query-node prune threshold: thresholds only tighten as
  // candidates arrive, so a value recorded earlier stays a valid bound.
  std::vector<double> node_bound(qtree.node_count(), Policy::worst_raw());

  auto descend_ref = [&](auto&& self_fn, std::size_t qn, std::size_t rn,
                         double score) -> void {
    if (Policy::prunable(score, node_bound[qn])) {
      if (log) log->dual.emplace_back(qn, rn);
      return;
    }
    const KdTree::Node& qnode = qtree.node(qn);
    const KdTree::Node& rnode = rtree.node(rn);
    if (rnode.is_leaf()) {
      double b = Policy::worst_raw();
      for (std::size_t t = qnode.begin; t < qnode.begin + qnode.count; ++t) {
        const std::size_t q = qtree.point_id(t);
        const double kth = cands.kth_raw(q);
        // the pair survived on the aggregate; most individual queries can
        // still skip this leaf
        if (!Policy::prunable(
                Policy::point_bound_raw_above(rnode.bound, query.row(q),
                                              metric, kth),
                kth)) {
          scan_leaf(rtree, rnode, query.row_ptr(q), q, self, cands, metric,
                    dim);
        }
        b = t == qnode.begin ? cands.kth_raw(q)
                             : Policy::aggregate(b, cands.kth_raw(q));
      }
      node_bound[qn] = b;
      return;
    }
    const double sl = Policy::pair_bound_raw(qnode.bound,
                                             rtree.node(rnode.left).bound,
                                             metric);
    const double sr = Policy::pair_bound_raw(qnode.bound,
                                             rtree.node(rnode.right).bound,
                                             metric);
    if (Policy::score_precedes(sr, sl)) {
      self_fn(self_fn, qn, rnode.right, sr);
      self_fn(self_fn, qn, rnode.left, sl);
    } else {
      self_fn(self_fn, qn, rnode.left, sl);
      self_fn(self_fn, qn, rnode.right, sr);
    }
  };

  auto descend_query = [&](auto&& self_fn, std::size_t qn) -> void {
    const KdTree::Node& qnode = qtree.node(qn);
    if (qnode.is_leaf()) {
      descend_ref(descend_ref, qn, rtree.root(),
                  Policy::pair_bound_raw(qnode.bound,
                                         rtree.node(rtree.root()).bound,
                                         metric));
      return;
    }
    self_fn(self_fn, qnode.left);
    self_fn(self_fn, qnode.right);
    node_bound[qn] =
        Policy::aggregate(node_bound[qnode.left], node_bound[qnode.right]);
  };
  descend_query(descend_query, qtree.root());
}

template <class Policy, MetricPolicy M>
void cover_search_single(const CoverTree<M>& tree, const DataMatrix& query,
                         bool self, CandidateList<Policy>& cands,
                         PruneLog* log = nullptr) {
  const M& metric = tree.metric();
  const DataMatrix& ref = tree.data();
  const std::size_t dim = ref.cols();

  for (std::size_t q = 0; q < query.rows(); ++q) {
    const double* qp = query.row_ptr(q);

    // d/raw are the true/power-domain distances from q to the node point.
    auto visit = [&](auto&& self_fn, std::size_t id, double raw,
                     double d) -> void {
      const auto& n = tree.node(id);
      if (n.is_leaf()) {
        if (self && n.point == q) return;
        cands.update(q, raw, n.point);
        return;
      }
      const std::size_t nc = n.children.size();
      std::vector<std::pair<double, double>> cd(nc);  // (raw, true)
      std::vector<double> bound(nc);
      for (std::size_t i = 0; i < nc; ++i) {
        const auto& c = tree.node(n.children[i]);
        if (c.point == n.point) {
          cd[i] = {raw, d};
        } else {
          const double craw = metric.raw_distance(qp, ref.row_ptr(c.point), dim);
          cd[i] = {craw, metric.root(craw)};
        }
        bound[i] = Policy::cover_bound(cd[i].second, c.fdd);
      }
      std::vector<std::size_t> order(nc);
      for (std::size_t i = 0; i < nc; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                       std::size_t b) {
        return Policy::score_precedes(bound[a], bound[b]);
      });
      for (std::size_t i : order) {
        if (Policy::prunable(metric.pow_abs(bound[i]), cands.kth_raw(q))) {
          if (log) log->single.emplace_back(q, n.children[i]);
          continue;
        }
        self_fn(self_fn, n.children[i], cd[i].first, cd[i].second);
      }
    };

    const auto& root = tree.node(tree.root());
    const double rraw = metric.raw_distance(qp, ref.row_ptr(root.point), dim);
    visit(visit, tree.root(), rraw, metric.root(rraw));
  }
}

template <class Policy, MetricPolicy M>
void cover_search_dual(const CoverTree<M>& rtree, const CoverTree<M>& qtree,
                       const DataMatrix& query, bool self,
                       CandidateList<Policy>& cands, PruneLog* log = nullptr) {
  const M& metric = rtree.metric();
  const DataMatrix& ref = rtree.data();
  const std::size_t dim = ref.cols();
  std::vector<double> node_bound(qtree.node_count(), Policy::worst_raw());

  // d/raw are the distances between the two node points.
  auto visit = [&](auto&& self_fn, std::size_t qn, std::size_t rn, double raw,
                   double d) -> void {
    const auto& qnode = qtree.node(qn);
    const auto& rnode = rtree.node(rn);
    const double pair_bound =
        Policy::cover_pair_bound(d, qnode.fdd, rnode.fdd);
    if (Policy::prunable(metric.pow_abs(pair_bound), node_bound[qn])) {
      if (log) log->dual.emplace_back(qn, rn);
      return;
    }
    if (qnode.is_leaf() && rnode.is_leaf()) {
      if (!(self && rnode.point == qnode.point)) {
        cands.update(qnode.point, raw, rnode.point);
      }
      node_bound[qn] = cands.kth_raw(qnode.point);
      return;
    }
    // Expand the coarser side; leaves are never expanded.
    const bool expand_query =
        !qnode.is_leaf() && (rnode.is_leaf() || qnode.scale >= rnode.scale);
    const auto& parent = expand_query ? qnode : rnode;
    const std::size_t other_point =
        expand_query ? rnode.point : qnode.point;
    const std::size_t nc = parent.children.size();
    std::vector<std::pair<double, double>> cd(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      const auto& c = expand_query ? qtree.node(parent.children[i])
                                   : rtree.node(parent.children[i]);
      if (c.point == parent.point) {
        cd[i] = {raw, d};
      } else {
        const double* a = expand_query ? query.row_ptr(c.point)
                                       : ref.row_ptr(c.point);
        const double* b = expand_query ? ref.row_ptr(other_point)
                                       : query.row_ptr(other_point);
        const double craw = metric.raw_distance(a, b, dim);
        cd[i] = {craw, metric.root(craw)};
      }
    }
    std::vector<std::size_t> order(nc);
    for (std::size_t i = 0; i < nc; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      const auto& ca = expand_query ? qtree.node(parent.children[a])
                                    : rtree.node(parent.children[a]);
      const auto& cb = expand_query ? qtree.node(parent.children[b])
                                    : rtree.node(parent.children[b]);
      const double fa = expand_query
                            ? Policy::cover_pair_bound(cd[a].second, ca.fdd,
                                                       rnode.fdd)
                            : Policy::cover_pair_bound(cd[a].second,
                                                       qnode.fdd, ca.fdd);
      const double fb = expand_query
                            ? Policy::cover_pair_bound(cd[b].second, cb.fdd,
                                                       rnode.fdd)
                            : Policy::cover_pair_bound(cd[b].second,
                                                       qnode.fdd, cb.fdd);
      return Policy::score_precedes(fa, fb);
    });
    if (expand_query) {
      for (std::size_t i : order) {
        self_fn(self_fn, parent.children[i], rn, cd[i].first, cd[i].second);
      }
      double b = node_bound[qnode.children[0]];
      for (std::size_t i = 1; i < qnode.children.size(); ++i) {
        b = Policy::aggregate(b, node_bound[qnode.children[i]]);
      }
      node_bound[qn] = b;
    } else {
      for (std::size_t i : order) {
        self_fn(self_fn, qn, parent.children[i], cd[i].first, cd[i].second);
      }
    }
  };

  const auto& qroot = qtree.node(qtree.root());
  const auto& rroot = rtree.node(rtree.root());
  const double raw = metric.raw_distance(query.row_ptr(qroot.point),
                                         ref.row_ptr(rroot.point), dim);
  visit(visit, qtree.root(), rtree.root(), raw, metric.root(raw));
}

inline void check_knn_args(std::size_t ref_rows, std::size_t ref_cols,
                           std::size_t query_cols, std::size_t k, bool self) {
  detail::check_same_dim(ref_cols, query_cols, "neighbor search");
  const std::size_t usable = self ? ref_rows - 1 : ref_rows;
  if (k == 0) {
    throw std::invalid_argument("neighbor search: k must be >= 1");
  }
  if (k > usable) {
    throw std::invalid_argument(
        "neighbor search: k = " + std::to_string(k) + " exceeds the " +
        std::to_string(usable) + " usable reference points");
  }
}

}  // namespace detail

/// Exhaustive exact search: every query against every reference point.
template <class Policy = NearestNeighborSort, MetricPolicy M = EuclideanMetric>
NeighborResult brute_force_search(const DataMatrix& ref,
                                  const DataMatrix& query, std::size_t k,
                                  const M& metric = {}) {
  detail::check_knn_args(ref.rows(), ref.cols(), query.cols(), k, false);
  detail::CandidateList<Policy> cands(query.rows(), k);
  detail::naive_search(ref, query, false, cands, metric);
  return cands.finalize(metric);
}

/// Monochromatic exhaustive search (query set = reference set, self
/// excluded).
template <class Policy = NearestNeighborSort, MetricPolicy M = EuclideanMetric>
NeighborResult brute_force_search_self(const DataMatrix& ref, std::size_t k,
                                       const M& metric = {}) {
  detail::check_knn_args(ref.rows(), ref.cols(), ref.cols(), k, true);
  detail::CandidateList<Policy> cands(ref.rows(), k);
  detail::naive_search(ref, ref, true, cands, metric);
  return cands.finalize(metric);
}

/// k-nearest (or furthest, by policy) neighbors over a kd-tree.  Dual
/// traversal builds a query tree internally with the reference tree's
/// leaf size.
template <class Policy = NearestNeighborSort, MetricPolicy M = EuclideanMetric>
NeighborResult knn_search(const KdTree& tree, const DataMatrix& query,
                          std::size_t k, Traversal traversal = Traversal::kDual,
                          const M& metric = {}) {
  detail::check_knn_args(tree.size(), tree.data().cols(), query.cols(), k,
                         false);
  detail::CandidateList<Policy> cands(query.rows(), k);
  switch (traversal) {
    case Traversal::kNaive:
      detail::naive_search(tree.data(), query, false, cands, metric);
      break;
    case Traversal::kSingle:
      detail::kd_search_single(tree, query, false, cands, metric);
      break;
    case Traversal::kDual: {
      const KdTree qtree(query, tree.leaf_size());
      detail::kd_search_dual(tree, qtree, query, false, cands, metric);
      break;
    }
  }
  return cands.finalize(metric);
}

template <class Policy = NearestNeighborSort, MetricPolicy M = EuclideanMetric>
NeighborResult knn_search_self(const KdTree& tree, std::size_t k,
                               Traversal traversal = Traversal::kDual,
                               const M& metric = {}) {
  const DataMatrix& data = tree.data();
  detail::check_knn_args(tree.size(), data.cols(), data.cols(), k, true);
  detail::CandidateList<Policy> cands(data.rows(), k);
  switch (traversal) {
    case Traversal::kNaive:
      detail::naive_search(data, data, true, cands, metric);
      break;
    case Traversal::kSingle:
      detail::kd_search_single(tree, data, true, cands, metric);
      break;
    case Traversal::kDual:
      detail::kd_search_dual(tree, tree, data, true, cands, metric);
      break;
  }
  return cands.finalize(metric);
}

/// k-nearest (or furthest) neighbors over a cover tree; the tree supplies
/// the metric.
template <class Policy = NearestNeighborSort, MetricPolicy M>
NeighborResult knn_search(const CoverTree<M>& tree, const DataMatrix& query,
                          std::size_t k,
                          Traversal traversal = Traversal::kSingle) {
  detail::check_knn_args(tree.size(), tree.data().cols(), query.cols(), k,
                         false);
  detail::CandidateList<Policy> cands(query.rows(), k);
  switch (traversal) {
    case Traversal::kNaive:
      detail::naive_search(tree.data(), query, false, cands, tree.metric());
      break;
    case Traversal::kSingle:
      detail::cover_search_single(tree, query, false, cands);
      break;
    case Traversal::kDual: {
      const CoverTree<M> qtree(query, tree.metric(), tree.base());
      detail::cover_search_dual(tree, qtree, query, false, cands);
      break;
    }
  }
  return cands.finalize(tree.metric());
}

template <class Policy = NearestNeighborSort, MetricPolicy M>
NeighborResult knn_search_self(const CoverTree<M>& tree, std::size_t k,
                               Traversal traversal = Traversal::kSingle) {
  const DataMatrix& data = tree.data();
  detail::check_knn_args(tree.size(), data.cols(), data.cols(), k, true);
  detail::CandidateList<Policy> cands(data.rows(), k);
  switch (traversal) {
    case Traversal::kNaive:
      detail::naive_search(data, data, true, cands, tree.metric());
      break;
    case Traversal::kSingle:
      detail::cover_search_single(tree, data, true, cands);
      break;
    case Traversal::kDual:
      detail::cover_search_dual(tree, tree, data, true, cands);
      break;
  }
  return cands.finalize(tree.metric());
}

}  // namespace mlcore

#endif  // MLCORE_NEIGHBOR_SEARCH_HPP

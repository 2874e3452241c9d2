#ifndef MLCORE_COVER_TREE_HPP
#define MLCORE_COVER_TREE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mlcore/matrix.hpp"
#include "mlcore/metrics.hpp"

namespace mlcore {

inline constexpr double kDefaultCoverBase = 2.0;

/// Metric-only hierarchical index.  A node at scale l covers its children
/// within base^l, and distinct-point siblings one scale down are separated
/// by more than base^(l-1).  A node's own point reappears as its first
/// child one scale down; runs of self-only chain nodes collapse directly
/// into the terminal leaf, so every dataset point appears in exactly one
/// leaf.  Exact duplicates attach as zero-distance leaf children of the
/// node holding the original point.
///
/// Construction inserts points in dataset order (ties resolved toward the
/// smaller point index), so trees are deterministic.  Immutable once
/// built; concurrent traversals are safe.
template <MetricPolicy M = EuclideanMetric>
class CoverTree {
 public:
  static constexpr int kLeafScale = std::numeric_limits<int>::min();
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Node {
    std::size_t point = 0;
    int scale = kLeafScale;
    double fdd = 0.0;  // exact max distance from point to any descendant
    std::vector<std::size_t> children;

    bool is_leaf() const { return scale == kLeafScale; }
  };

  explicit CoverTree(const DataMatrix& data, M metric = {},
                     double base = kDefaultCoverBase)
      : data_(&data), metric_(std::move(metric)), base_(base) {
    if (!(base > 1.0)) {
      throw std::invalid_argument("CoverTree: base must be > 1");
    }
    build_.reserve(data.rows());
    dist_cache_.reserve(data.rows());
    stamp_.reserve(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) insert(i);
    root_ = materialize(0, root_scale_set_ ? root_scale_ : 0);
    std::vector<std::size_t> scratch;
    compute_fdd(root_, scratch);
    build_.clear();
    build_.shrink_to_fit();
  }

  const DataMatrix& data() const { return *data_; }
  const M& metric() const { return metric_; }
  double base() const { return base_; }
  std::size_t size() const { return data_->rows(); }

  std::size_t root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_[id]; }

 private:
  struct BuildNode {
    std::size_t point;
    // (scale of child, build id), appended in insertion order
    std::vector<std::pair<int, std::size_t>> children;
    std::vector<std::size_t> duplicates;
  };

  double radius(int scale) const {
    return std::pow(base_, static_cast<double>(scale));
  }

  // Smallest integer scale whose radius covers d (d > 0).
  int scale_for(double d) const {
    int l = static_cast<int>(std::ceil(std::log(d) / std::log(base_)));
    while (radius(l) < d) ++l;
    while (radius(l - 1) >= d) --l;
    return l;
  }

  double dist_to(std::size_t point, std::size_t build_id) {
    if (stamp_[build_id] != cur_stamp_) {
      stamp_[build_id] = cur_stamp_;
      dist_cache_[build_id] = metric_.root(metric_.raw_distance(
          data_->row_ptr(point), data_->row_ptr(build_[build_id].point),
          data_->cols()));
    }
    return dist_cache_[build_id];
  }

  void insert(std::size_t point) {
    if (build_.empty()) {
      build_.push_back(BuildNode{point, {}, {}});
      dist_cache_.push_back(0.0);
      stamp_.push_back(0);
      return;
    }
    ++cur_stamp_;
    const double dr = dist_to(point, 0);
    if (dr > 0.0) {
      if (!root_scale_set_) {
        root_scale_ = scale_for(dr);
        root_scale_set_ = true;
      } else if (dr > radius(root_scale_)) {
        root_scale_ = scale_for(dr);
      }
    }
    const bool done = insert_rec(point, {0}, root_scale_set_ ? root_scale_ : 0);
    if (!done) {
      throw std::logic_error("CoverTree: insertion failed to find a parent");
    }
  }

  bool insert_rec(std::size_t point, std::vector<std::size_t> cover, int i) {
    // Candidates at scale i-1: the cover set itself (implicit self-
    // children) plus recorded children one scale down.
    std::vector<std::size_t> cand = cover;
    for (std::size_t q : cover) {
      for (const auto& [sc, c] : build_[q].children) {
        if (sc == i - 1) cand.push_back(c);
      }
    }
    double dmin = std::numeric_limits<double>::infinity();
    std::size_t best = npos;
    for (std::size_t c : cand) {
      const double d = dist_to(point, c);
      if (d < dmin || (d == dmin && build_[c].point < build_[best].point)) {
        dmin = d;
        best = c;
      }
    }
    if (dmin == 0.0) {
      build_[best].duplicates.push_back(point);
      return true;
    }
    if (dmin > radius(i)) return false;

    std::vector<std::size_t> next;
    for (std::size_t c : cand) {
      if (dist_to(point, c) <= radius(i)) next.push_back(c);
    }
    if (insert_rec(point, std::move(next), i - 1)) return true;

    // No parent below; attach as a child of the closest level-i node.
    double dparent = std::numeric_limits<double>::infinity();
    std::size_t parent = npos;
    for (std::size_t q : cover) {
      const double d = dist_to(point, q);
      if (d < dparent ||
          (d == dparent && build_[q].point < build_[parent].point)) {
        dparent = d;
        parent = q;
      }
    }
    if (dparent > radius(i)) return false;
    const std::size_t id = build_.size();
    build_.push_back(BuildNode{point, {}, {}});
    dist_cache_.push_back(0.0);
    stamp_.push_back(0);
    build_[parent].children.emplace_back(i - 1, id);
    return true;
  }

  std::size_t emit_leaf(std::size_t point) {
    nodes_.push_back(Node{point, kLeafScale, 0.0, {}});
    return nodes_.size() - 1;
  }

  // Builds the explicit chain for build node b occupying node_scale.
  // Children recorded at scale s hang off the chain node at scale s+1;
  // the chain bottoms out in the point's leaf (plus duplicate leaves).
  std::size_t materialize(std::size_t b, int node_scale) {
    const BuildNode& bn = build_[b];
    if (bn.children.empty() && bn.duplicates.empty()) {
      return emit_leaf(bn.point);
    }
    int s_min = node_scale - 1;
    for (const auto& [sc, c] : bn.children) s_min = std::min(s_min, sc);
    const int t_end = bn.children.empty() ? node_scale : s_min + 1;

    std::size_t below = emit_leaf(bn.point);
    for (int t = t_end; t <= node_scale; ++t) {
      std::vector<std::size_t> ch{below};
      for (const auto& [sc, c] : bn.children) {
        if (sc == t - 1) ch.push_back(materialize(c, t - 1));
      }
      if (t == t_end) {
        for (std::size_t dup : bn.duplicates) ch.push_back(emit_leaf(dup));
      }
      nodes_.push_back(Node{bn.point, t, 0.0, std::move(ch)});
      below = nodes_.size() - 1;
    }
    return below;
  }

  // Exact furthest-descendant distance; out collects descendant points.
  void compute_fdd(std::size_t id, std::vector<std::size_t>& out) {
    Node& n = nodes_[id];
    if (n.is_leaf()) {
      out.push_back(n.point);
      return;
    }
    std::vector<std::size_t> desc;
    for (std::size_t c : n.children) compute_fdd(c, desc);
    double fdd = 0.0;
    const double* p = data_->row_ptr(n.point);
    for (std::size_t x : desc) {
      fdd = std::max(fdd, metric_.root(metric_.raw_distance(
                              p, data_->row_ptr(x), data_->cols())));
    }
    n.fdd = fdd;
    out.insert(out.end(), desc.begin(), desc.end());
  }

  const DataMatrix* data_;
  M metric_;
  double base_;
  std::size_t root_ = 0;
  std::vector<Node> nodes_;

  // construction-only state
  std::vector<BuildNode> build_;
  std::vector<double> dist_cache_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t cur_stamp_ = 0;
  int root_scale_ = 0;
  bool root_scale_set_ = false;
};

/// Lower bound on the distance from q to any point in the node's subtree:
/// max(0, d(q, node point) - furthest descendant distance).
template <MetricPolicy M>
double node_min_dist(const CoverTree<M>& tree, std::size_t node_id,
                     std::span<const double> q) {
  const auto& n = tree.node(node_id);
  const double d = tree.metric().distance(q, tree.data().row(n.point));
  return std::max(0.0, d - n.fdd);
}

}  // namespace mlcore

#endif  // MLCORE_COVER_TREE_HPP

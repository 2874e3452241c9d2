#ifndef MLCORE_KDTREE_HPP
#define MLCORE_KDTREE_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mlcore/hrect_bound.hpp"
#include "mlcore/matrix.hpp"

namespace mlcore {

inline constexpr std::size_t kDefaultLeafSize = 20;

/// Axis-aligned binary space-partitioning tree.  The tree never copies
/// points; it permutes an index array so each node owns a contiguous range
/// [begin, begin+count) of point ids.  Splits use the widest bound
/// dimension at its midpoint, falling back to the median (ties sent left)
/// if a side would be empty.  Immutable once built; concurrent traversals
/// are safe.
class KdTree {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Node {
    HRectBound bound;
    std::size_t begin = 0;
    std::size_t count = 0;
    std::size_t left = npos;
    std::size_t right = npos;
    std::size_t split_dim = 0;
    double split_value = 0.0;

    bool is_leaf() const { return left == npos; }
  };

  explicit KdTree(const DataMatrix& data,
                  std::size_t leaf_size = kDefaultLeafSize)
      : data_(&data), leaf_size_(leaf_size) {
    if (leaf_size == 0) {
      throw std::invalid_argument("KdTree: leaf_size must be >= 1");
    }
    point_ids_.resize(data.rows());
    std::iota(point_ids_.begin(), point_ids_.end(), std::size_t{0});
    nodes_.reserve(2 * data.rows() / leaf_size + 1);
    build(0, data.rows());
  }

  const DataMatrix& data() const { return *data_; }
  std::size_t size() const { return data_->rows(); }
  std::size_t leaf_size() const { return leaf_size_; }

  std::size_t root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_[id]; }

  /// Original point index of the t-th slot in tree order.
  std::size_t point_id(std::size_t t) const { return point_ids_[t]; }
  const std::vector<std::size_t>& permutation() const { return point_ids_; }

  std::size_t depth() const { return depth_below(0); }

 private:
  std::size_t build(std::size_t begin, std::size_t count) {
    const std::size_t id = nodes_.size();
    Node node{HRectBound(data_->cols()), begin, count};
    for (std::size_t t = begin; t < begin + count; ++t) {
      node.bound.grow(data_->row(point_ids_[t]));
    }
    nodes_.push_back(std::move(node));
    if (count <= leaf_size_) return id;

    std::size_t dim = 0;
    double width = -1.0;
    for (std::size_t j = 0; j < data_->cols(); ++j) {
      const double w = nodes_[id].bound.hi(j) - nodes_[id].bound.lo(j);
      if (w > width) {
        width = w;
        dim = j;
      }
    }
    // All points identical: no coordinate split can separate them, so the
    // range stays a single (oversized) leaf.
    if (width <= 0.0) return id;

    const double lo = nodes_[id].bound.lo(dim);
    const double hi = nodes_[id].bound.hi(dim);
    double split = lo + 0.5 * (hi - lo);
    std::size_t mid = partition_range(begin, count, dim, split);
    if (mid == begin || mid == begin + count) {
      split = median_split_value(begin, count, dim, hi);
      mid = partition_range(begin, count, dim, split);
    }

    const std::size_t left = build(begin, mid - begin);
    const std::size_t right = build(mid, begin + count - mid);
    nodes_[id].left = left;
    nodes_[id].right = right;
    nodes_[id].split_dim = dim;
    nodes_[id].split_value = split;
    return id;
  }

  // Points with coordinate <= split go left; returns the first right slot.
  std::size_t partition_range(std::size_t begin, std::size_t count,
                              std::size_t dim, double split) {
    const auto first = point_ids_.begin() + begin;
    const auto last = first + count;
    const auto mid = std::partition(first, last, [&](std::size_t id) {
      return (*data_)(id, dim) <= split;
    });
    return static_cast<std::size_t>(mid - point_ids_.begin());
  }

  double median_split_value(std::size_t begin, std::size_t count,
                            std::size_t dim, double max_coord) {
    std::vector<double> coords(count);
    for (std::size_t t = 0; t < count; ++t) {
      coords[t] = (*data_)(point_ids_[begin + t], dim);
    }
    std::nth_element(coords.begin(), coords.begin() + (count - 1) / 2,
                     coords.end());
    double median = coords[(count - 1) / 2];
    if (median < max_coord) return median;
    // Median equals the maximum; pick the largest value below it so the
    // right side stays non-empty.
    double below = -std::numeric_limits<double>::infinity();
    for (double c : coords) {
      if (c < max_coord) below = std::max(below, c);
    }
    return below;
  }

  std::size_t depth_below(std::size_t id) const {
    const Node& n = nodes_[id];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_below(n.left), depth_below(n.right));
  }

  const DataMatrix* data_;
  std::size_t leaf_size_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> point_ids_;
};

}  // namespace mlcore

#endif  // MLCORE_KDTREE_HPP

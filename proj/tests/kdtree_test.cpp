#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mlcore/hrect_bound.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/metrics.hpp"
#include "test_util.hpp"

namespace {

using mlcore::DataMatrix;
using mlcore::EuclideanMetric;
using mlcore::HRectBound;
using mlcore::KdTree;
using mlcore::ManhattanMetric;

TEST(KdTreeTest, SinglePointIsOneLeaf) {
  const auto data = DataMatrix::from_rows({{0.5, 0.5}});
  const KdTree tree(data, 20);
  EXPECT_EQ(tree.node_count(), 1u);
  EXPECT_TRUE(tree.node(tree.root()).is_leaf());
  EXPECT_EQ(testutil::check_kdtree(tree), "");
}

TEST(KdTreeTest, WineShapedDataSatisfiesInvariants) {
  const auto data = testutil::random_matrix(178, 13, 2012);
  const KdTree tree(data, 20);
  EXPECT_EQ(testutil::check_kdtree(tree), "");
}

TEST(KdTreeTest, CollinearPointsStayShallow) {
  std::vector<double> values(100);
  for (int i = 0; i < 100; ++i) values[i] = i;
  const DataMatrix data(100, 1, std::move(values));
  const KdTree tree(data, 1);
  EXPECT_EQ(testutil::check_kdtree(tree), "");
  const std::size_t cap =
      2 * static_cast<std::size_t>(std::ceil(std::log2(100.0)));
  EXPECT_LE(tree.depth(), cap);
}

TEST(KdTreeTest, RebuildIsIdentical) {
  const auto data = testutil::random_matrix(500, 5, 77);
  const KdTree a(data, 10);
  const KdTree b(data, 10);
  ASSERT_EQ(a.node_count(), b.node_count());
  EXPECT_EQ(a.permutation(), b.permutation());
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    EXPECT_EQ(a.node(i).begin, b.node(i).begin);
    EXPECT_EQ(a.node(i).count, b.node(i).count);
    EXPECT_EQ(a.node(i).left, b.node(i).left);
    EXPECT_TRUE(a.node(i).bound == b.node(i).bound);
  }
}

TEST(KdTreeTest, DuplicatePointsAreLegal) {
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) {
    values.push_back(0.25);
    values.push_back(0.75);
  }
  const DataMatrix data(50, 2, std::move(values));
  const KdTree tree(data, 4);
  EXPECT_EQ(testutil::check_kdtree(tree), "");
}

TEST(KdTreeTest, RandomTreesSatisfyInvariants) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    mlcore::SeededRng rng(seed * 31 + 1);
    const std::size_t n = 1 + rng.next_below(1000);
    const std::size_t d = 1 + rng.next_below(8);
    const std::size_t leaf = 1 + rng.next_below(30);
    const auto data = mlcore::generate_uniform(n, d, rng);
    const KdTree tree(data, leaf);
    ASSERT_EQ(testutil::check_kdtree(tree), "")
        << "n=" << n << " d=" << d << " leaf=" << leaf;
  }
}

TEST(KdTreeTest, RejectsZeroLeafSize) {
  const auto data = DataMatrix::from_rows({{1.0}});
  EXPECT_THROW(KdTree(data, 0), std::invalid_argument);
}

HRectBound unit_square() {
  HRectBound b(2);
  b.grow(std::vector<double>{0.0, 0.0});
  b.grow(std::vector<double>{1.0, 1.0});
  return b;
}

TEST(HRectBoundTest, MinDistPointCases) {
  const auto b = unit_square();
  const EuclideanMetric l2;
  const ManhattanMetric l1;
  EXPECT_DOUBLE_EQ(
      mlcore::min_dist_point(b, std::vector<double>{0.5, 0.5}, l2), 0.0);
  EXPECT_DOUBLE_EQ(
      mlcore::min_dist_point(b, std::vector<double>{3.0, 1.0}, l2), 2.0);
  EXPECT_DOUBLE_EQ(
      mlcore::min_dist_point(b, std::vector<double>{2.0, 2.0}, l1), 2.0);
}

TEST(HRectBoundTest, MaxDistPointCases) {
  const auto b = unit_square();
  const EuclideanMetric l2;
  EXPECT_DOUBLE_EQ(
      mlcore::max_dist_point(b, std::vector<double>{0.0, 0.0}, l2),
      std::sqrt(2.0));

  HRectBound point_bound(2);
  point_bound.grow(std::vector<double>{0.25, 0.75});
  const std::vector<double> q{1.0, 1.0};
  EXPECT_DOUBLE_EQ(mlcore::max_dist_point(point_bound, q, l2),
                   l2.distance(q, std::vector<double>{0.25, 0.75}));

  HRectBound line(1);
  line.grow(std::vector<double>{0.0});
  line.grow(std::vector<double>{2.0});
  EXPECT_DOUBLE_EQ(
      mlcore::max_dist_point(line, std::vector<double>{1.0},
                             ManhattanMetric{}),
      1.0);
}

TEST(HRectBoundTest, BoundToBoundDistances) {
  const EuclideanMetric l2;
  HRectBound a(1), b(1);
  a.grow(std::vector<double>{0.0});
  a.grow(std::vector<double>{1.0});
  b.grow(std::vector<double>{3.0});
  b.grow(std::vector<double>{5.0});
  EXPECT_DOUBLE_EQ(mlcore::min_dist_bound(a, b, l2), 2.0);

  HRectBound c(2), d(2);
  c.grow(std::vector<double>{0.0, 0.0});
  c.grow(std::vector<double>{1.0, 1.0});
  d.grow(std::vector<double>{2.0, 2.0});
  d.grow(std::vector<double>{3.0, 3.0});
  EXPECT_DOUBLE_EQ(mlcore::min_dist_bound(c, d, l2), std::sqrt(2.0));

  HRectBound e(2);
  e.grow(std::vector<double>{0.5, 0.5});
  e.grow(std::vector<double>{1.5, 1.5});
  EXPECT_DOUBLE_EQ(mlcore::min_dist_bound(c, e, l2), 0.0);
}

TEST(HRectBoundTest, DimensionMismatchThrows) {
  const auto b = unit_square();
  EXPECT_THROW(
      mlcore::min_dist_point(b, std::vector<double>{1.0}, EuclideanMetric{}),
      std::invalid_argument);
}

// For every node and every query: min_dist <= min over subtree points <=
// max over subtree points <= max_dist (exhaustive on small trees).
TEST(KdTreeTest, NodeBoundsSandwichTrueDistances) {
  const EuclideanMetric l2;
  const ManhattanMetric l1;
  const auto data = testutil::random_matrix(400, 3, 909);
  const auto queries = testutil::random_matrix(25, 3, 910);
  const KdTree tree(data, 8);
  for (std::size_t id = 0; id < tree.node_count(); ++id) {
    const auto& node = tree.node(id);
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const auto qrow = queries.row(q);
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (std::size_t t = node.begin; t < node.begin + node.count; ++t) {
        const double dd = l2.distance(qrow, data.row(tree.point_id(t)));
        lo = std::min(lo, dd);
        hi = std::max(hi, dd);
      }
      ASSERT_LE(mlcore::min_dist_point(node.bound, qrow, l2), lo + 1e-12);
      ASSERT_GE(mlcore::max_dist_point(node.bound, qrow, l2), hi - 1e-12);
      double lo1 = std::numeric_limits<double>::infinity();
      double hi1 = 0.0;
      for (std::size_t t = node.begin; t < node.begin + node.count; ++t) {
        const double dd = l1.distance(qrow, data.row(tree.point_id(t)));
        lo1 = std::min(lo1, dd);
        hi1 = std::max(hi1, dd);
      }
      ASSERT_LE(mlcore::min_dist_point(node.bound, qrow, l1), lo1 + 1e-12);
      ASSERT_GE(mlcore::max_dist_point(node.bound, qrow, l1), hi1 - 1e-12);
    }
  }
}

}  // namespace

#include <gtest/gtest.h>

#include <limits>
#include <vector>

#include "mlcore/cover_tree.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/range_search.hpp"
#include "test_util.hpp"

namespace {

using mlcore::CoverTree;
using mlcore::DataMatrix;
using mlcore::EuclideanMetric;
using mlcore::KdTree;
using mlcore::ManhattanMetric;

template <class Result>
void expect_equal_ranges(
    const Result& got,
    const std::vector<std::vector<std::pair<std::size_t, double>>>& want) {
  ASSERT_EQ(got.matches.size(), want.size());
  for (std::size_t q = 0; q < want.size(); ++q) {
    ASSERT_EQ(got.matches[q].size(), want[q].size()) << "query " << q;
    for (std::size_t i = 0; i < want[q].size(); ++i) {
      ASSERT_EQ(got.matches[q][i].first, want[q][i].first) << "query " << q;
      ASSERT_EQ(got.matches[q][i].second, want[q][i].second) << "query " << q;
    }
  }
}

TEST(RangeSearchTest, ZeroRadiusSelfModeIsEmptyOnDistinctPoints) {
  const auto data = testutil::random_matrix(100, 3, 808);
  const KdTree kdtree(data);
  const auto res = mlcore::range_search_self(kdtree, 0.0, 0.0);
  for (const auto& matches : res.matches) {
    EXPECT_TRUE(matches.empty());
  }
  const CoverTree<EuclideanMetric> ctree(data);
  const auto cres = mlcore::range_search_self(ctree, 0.0, 0.0);
  for (const auto& matches : cres.matches) {
    EXPECT_TRUE(matches.empty());
  }
}

TEST(RangeSearchTest, FullRangeListsEveryReferencePoint) {
  const auto ref = testutil::random_matrix(80, 2, 809);
  const auto query = testutil::random_matrix(9, 2, 810);
  const double huge = std::numeric_limits<double>::max();
  const KdTree tree(ref);
  const auto res = mlcore::range_search(tree, query, 0.0, huge);
  for (const auto& matches : res.matches) {
    ASSERT_EQ(matches.size(), ref.rows());
    for (std::size_t i = 0; i < matches.size(); ++i) {
      ASSERT_EQ(matches[i].first, i);  // ascending index order
    }
  }
}

TEST(RangeSearchTest, MatchesExhaustiveFilter) {
  const auto data = testutil::random_matrix(500, 3, 811);
  const EuclideanMetric l2;
  const auto oracle = testutil::oracle_range(data, data, 0.1, 0.3, l2, true);
  const KdTree kdtree(data, 7);
  expect_equal_ranges(mlcore::range_search_self(kdtree, 0.1, 0.3, l2), oracle);
  const CoverTree<EuclideanMetric> ctree(data);
  expect_equal_ranges(mlcore::range_search_self(ctree, 0.1, 0.3), oracle);
}

TEST(RangeSearchTest, BichromaticAndManhattanAgreeWithOracle) {
  const auto ref = testutil::random_matrix(300, 4, 812);
  const auto query = testutil::random_matrix(45, 4, 813);
  const ManhattanMetric l1;
  for (const auto& [low, high] :
       std::vector<std::pair<double, double>>{{0.0, 0.9}, {0.5, 1.4},
                                              {2.5, 9.0}}) {
    const auto oracle = testutil::oracle_range(ref, query, low, high, l1,
                                               false);
    const KdTree kdtree(ref, 9);
    expect_equal_ranges(mlcore::range_search(kdtree, query, low, high, l1),
                        oracle);
    const CoverTree<ManhattanMetric> ctree(ref, l1, 1.7);
    expect_equal_ranges(mlcore::range_search(ctree, query, low, high), oracle);
  }
}

TEST(RangeSearchTest, RejectsBadBounds) {
  const auto data = testutil::random_matrix(10, 2, 814);
  const KdTree tree(data);
  EXPECT_THROW(mlcore::range_search_self(tree, 0.5, 0.4),
               std::invalid_argument);
  EXPECT_THROW(mlcore::range_search_self(tree, -0.1, 0.4),
               std::invalid_argument);
}

}  // namespace

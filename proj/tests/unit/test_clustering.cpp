#include <gtest/gtest.h>

#include "oracles.hpp"
#include "warnbench/clustering.hpp"
#include "warnbench/error.hpp"

using namespace warnbench;

namespace {

std::vector<Point> three_blobs(std::vector<std::size_t>* truth = nullptr) {
  return wbtest::blobs({{0, 0}, {10, 0}, {0, 10}}, 20, 1.0, truth);
}

}  // namespace

TEST(Distance, Basics) {
  EXPECT_DOUBLE_EQ(squared_distance({0, 0}, {3, 4}), 25.0);
  EXPECT_DOUBLE_EQ(euclidean_distance({0, 0}, {3, 4}), 5.0);
  std::vector<Point> pts{{0, 0}, {0, 0}, {1, 0}};
  EXPECT_EQ(count_distinct(pts), 2u);
  DistanceMatrix dm(pts);
  EXPECT_EQ(dm.size(), 3u);
  EXPECT_DOUBLE_EQ(dm(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(dm(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(dm(1, 1), 0.0);
}

TEST(Silhouette, MatchesBruteForce) {
  std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {9, 9}};
  std::vector<std::size_t> labels{0, 0, 0, 1, 1, 2};
  DistanceMatrix dm(pts);
  auto got = silhouette_values(dm, labels, 3);
  auto want = wbtest::brute_silhouette(pts, labels);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << i;
  EXPECT_EQ(got[5], 0.0);  // singleton
  EXPECT_NEAR(mean_silhouette(dm, labels, 3), wbtest::mean(want), 1e-12);
}

TEST(Silhouette, SingleClusterScoresZero) {
  std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}};
  std::vector<std::size_t> labels{0, 0, 0};
  DistanceMatrix dm(pts);
  for (double s : silhouette_values(dm, labels, 2)) EXPECT_EQ(s, 0.0);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  std::vector<std::size_t> truth;
  auto pts = three_blobs(&truth);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = kmeans(pts, 3, seed);
    EXPECT_EQ(c.k, 3u);
    EXPECT_TRUE(c.converged);
    EXPECT_DOUBLE_EQ(wbtest::purity(c.assignments, truth), 1.0);
    // Lloyd iterations never increase inertia.
    for (std::size_t i = 1; i < c.inertia_trace.size(); ++i) {
      EXPECT_LE(c.inertia_trace[i], c.inertia_trace[i - 1] + 1e-9);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_EQ(nearest_centroid(pts[i], c.centroids), c.assignments[i]);
    }
  }
}

TEST(KMeans, DeterministicPerSeed) {
  auto pts = three_blobs();
  auto a = kmeans(pts, 4, 17);
  auto b = kmeans(pts, 4, 17);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, ReducesKToDistinctPoints) {
  std::vector<Point> pts{{0, 0}, {0, 0}, {1, 1}, {1, 1}, {2, 2}};
  auto c = kmeans(pts, 4, 0);
  EXPECT_EQ(c.k, 3u);
  EXPECT_EQ(c.centroids.size(), 3u);
}

TEST(KMeans, Errors) {
  std::vector<Point> same{{1, 1}, {1, 1}, {1, 1}};
  try {
    kmeans(same, 2, 0);
    FAIL() << "expected DegenerateClustering";
  } catch (const DegenerateClustering& e) {
    EXPECT_EQ(e.reduced_k(), 1u);
  }
  std::vector<Point> pts{{0, 0}, {1, 1}};
  EXPECT_THROW(kmeans(pts, 1, 0), PreconditionError);
  std::vector<Point> ragged{{0, 0}, {1}};
  EXPECT_THROW(kmeans(ragged, 2, 0), Error);
}

TEST(NearestCentroid, LowestIndexOnTies) {
  std::vector<Point> c{{1, 0}, {-1, 0}};
  EXPECT_EQ(nearest_centroid({0, 0}, c), 0u);
  EXPECT_EQ(nearest_centroid({-0.5, 0}, c), 1u);
}

TEST(SelectK, FindsThreeBlobs) {
  auto pts = three_blobs();
  auto sel = silhouette_select_k(pts, 2);
  EXPECT_EQ(sel.k, 3u);
  ASSERT_EQ(sel.scores.size(), 9u);  // k = 2..10
  EXPECT_EQ(sel.scores.front().first, 2u);
  EXPECT_EQ(sel.scores.back().first, 10u);
}

TEST(SelectK, TiesGoToSmallerK) {
  // Vertices of a regular simplex: every partition scores exactly 0.
  std::vector<Point> pts;
  for (int i = 0; i < 6; ++i) {
    Point p(6, 0.0);
    p[i] = 1.0;
    pts.push_back(p);
  }
  auto sel = silhouette_select_k(pts, 0);
  EXPECT_EQ(sel.k, 2u);
}

TEST(SelectK, RangeAndErrors) {
  std::vector<Point> pts{{0, 0}, {1, 0}, {5, 5}, {6, 5}};
  auto sel = silhouette_select_k(pts, 0);
  for (auto& [k, s] : sel.scores) EXPECT_LE(k, 3u);
  std::vector<Point> two{{0, 0}, {1, 1}};
  EXPECT_THROW(silhouette_select_k(two, 0), UndefinedError);
  EXPECT_THROW(silhouette_select_k(pts, 0, 3, 2), PreconditionError);
}

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warnbench/error.hpp"

namespace warnbench {

using Point = std::vector<double>;

double squared_distance(const Point& a, const Point& b);
double euclidean_distance(const Point& a, const Point& b);

std::size_t count_distinct(std::span<const Point> points);

// Condensed symmetric matrix of pairwise Euclidean distances.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::span<const Point> points);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// Per-point silhouette (b - a) / max(a, b); members of singleton clusters
// score 0, and so does every point when fewer than two clusters are
// populated.
std::vector<double> silhouette_values(const DistanceMatrix& distances,
                                      std::span<const std::size_t> assignments,
                                      std::size_t k);
double mean_silhouette(const DistanceMatrix& distances,
                       std::span<const std::size_t> assignments, std::size_t k);

struct Clustering {
  std::size_t k = 0;
  std::vector<Point> centroids;
  std::vector<std::size_t> assignments;  // index-aligned with the input
  double silhouette = 0.0;
  // Sum of squared distances to the assigned centroid after each
  // assignment step.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

// Fewer than two distinct points: no meaningful partition exists.
class DegenerateClustering : public UndefinedError {
 public:
  explicit DegenerateClustering(std::size_t distinct)
      : UndefinedError("clustering is degenerate: only " +
                       std::to_string(distinct) + " distinct point(s)"),
        reduced_k_(distinct) {}
  std::size_t reduced_k() const { return reduced_k_; }

 private:
  std::size_t reduced_k_;
};

inline constexpr std::size_t kMaxLloydIterations = 300;

// Seeded k-means++ initialization followed by Lloyd iterations until the
// assignment is stable or `max_iterations` is reached. If fewer than k
// distinct points exist, k is reduced to the distinct count (logged); with
// fewer than two distinct points DegenerateClustering is thrown.
Clustering kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                  std::size_t max_iterations = kMaxLloydIterations);
Clustering kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                  const DistanceMatrix& distances,
                  std::size_t max_iterations = kMaxLloydIterations);

std::size_t nearest_centroid(const Point& p, std::span<const Point> centroids);

struct KSelection {
  std::size_t k = 0;
  Clustering clustering;
  // (k, mean silhouette) for every k evaluated.
  std::vector<std::pair<std::size_t, double>> scores;
};

inline constexpr std::size_t kDefaultMaxClusters = 10;

// Mean silhouette for every k in [k_min, k_max] (k above the distinct-point
// count is skipped); highest wins, ties go to the smaller k. Throws
// UndefinedError for fewer than three points.
KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed,
                               std::size_t k_min, std::size_t k_max);
// Default range [2, min(10, n - 1)].
KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed);
KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed,
                               const DistanceMatrix& distances, std::size_t k_min,
                               std::size_t k_max);

}  // namespace warnbench

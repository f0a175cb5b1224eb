#include "warnbench/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <spdlog/spdlog.h>

#include "warnbench/text.hpp"

namespace warnbench {

double squared_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    throw PreconditionError("points have different dimensions");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

std::size_t count_distinct(std::span<const Point> points) {
  std::set<Point> s(points.begin(), points.end());
  return s.size();
}

DistanceMatrix::DistanceMatrix(std::span<const Point> points)
    : n_(points.size()), d_(n_ > 1 ? n_ * (n_ - 1) / 2 : 0) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      d_[idx++] = euclidean_distance(points[i], points[j]);
    }
  }
}

double DistanceMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  // Row i starts after sum_{r<i} (n - 1 - r) entries.
  const std::size_t row_start = i * (2 * n_ - i - 1) / 2;
  return d_[row_start + (j - i - 1)];
}

std::vector<double> silhouette_values(const DistanceMatrix& distances,
                                      std::span<const std::size_t> assignments,
                                      std::size_t k) {
  const std::size_t n = assignments.size();
  if (distances.size() != n) {
    throw PreconditionError("distance matrix does not match assignments");
  }
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) {
    if (a >= k) throw PreconditionError("assignment outside cluster range");
    ++sizes[a];
  }
  const auto populated = std::count_if(sizes.begin(), sizes.end(),
                                       [](std::size_t s) { return s > 0; });
  std::vector<double> s(n, 0.0);
  if (populated < 2) return s;

  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[assignments[j]] += distances(i, j);
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

double mean_silhouette(const DistanceMatrix& distances,
                       std::span<const std::size_t> assignments, std::size_t k) {
  auto s = silhouette_values(distances, assignments, k);
  if (s.empty()) return 0.0;
  double sum = 0.0;
  for (double x : s) sum += x;
  return sum / static_cast<double>(s.size());
}

std::size_t nearest_centroid(const Point& p, std::span<const Point> centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

// Greedy k-means++: each step samples 2 + floor(ln k) candidates in
// proportion to D^2 and keeps the one that lowers the potential most.
std::vector<Point> kmeans_plus_plus(std::span<const Point> points, std::size_t k,
                                    Rng& rng) {
  const std::size_t trials =
      2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<Point> centroids;
  centroids.push_back(points[rng.index(points.size())]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    d2[i] = squared_distance(points[i], centroids[0]);
  }
  auto sample = [&](double total) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (u < acc) break;
    }
    return pick;
  };
  std::vector<double> candidate_d2(points.size());
  std::vector<double> best_d2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    if (total <= 0.0) {
      centroids.push_back(points[0]);
      continue;
    }
    std::size_t best = points.size();
    double best_potential = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t c = sample(total);
      double potential = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        candidate_d2[i] = std::min(d2[i], squared_distance(points[i], points[c]));
        potential += candidate_d2[i];
      }
      if (best == points.size() || potential < best_potential) {
        best = c;
        best_potential = potential;
        best_d2.swap(candidate_d2);
      }
    }
    centroids.push_back(points[best]);
    d2.swap(best_d2);
  }
  return centroids;
}

double assign(std::span<const Point> points, std::span<const Point> centroids,
              std::vector<std::size_t>& assignments) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    assignments[i] = nearest_centroid(points[i], centroids);
    inertia += squared_distance(points[i], centroids[assignments[i]]);
  }
  return inertia;
}

void update_centroids(std::span<const Point> points,
                      const std::vector<std::size_t>& assignments,
                      std::vector<Point>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();
  std::vector<Point> sums(k, Point(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[assignments[i]];
    for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
    ++counts[assignments[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  // Empty clusters take over the point farthest from its own centroid among
  // clusters that can spare one.
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[assignments[i]] < 2) continue;
      const double d = squared_distance(points[i], centroids[assignments[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) continue;
    centroids[c] = points[far];
    --counts[assignments[far]];
    counts[c] = 1;
  }
}

}  // namespace

Clustering kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                  std::size_t max_iterations) {
  DistanceMatrix dm(points);
  return kmeans(points, k, seed, dm, max_iterations);
}

Clustering kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                  const DistanceMatrix& distances, std::size_t max_iterations) {
  if (k < 2) throw PreconditionError("k-means needs k >= 2");
  if (points.size() < k) {
    throw PreconditionError("k-means needs at least k points");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw PreconditionError("points have different dimensions");
  }
  const std::size_t distinct = count_distinct(points);
  if (distinct < 2) throw DegenerateClustering(distinct);
  if (distinct < k) {
    spdlog::info("k-means: reducing k from {} to {} distinct points", k, distinct);
    k = distinct;
  }

  Rng rng(seed);
  Clustering out;
  out.k = k;
  out.centroids = kmeans_plus_plus(points, k, rng);
  out.assignments.assign(points.size(), 0);
  std::vector<std::size_t> previous;

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    out.inertia_trace.push_back(assign(points, out.centroids, out.assignments));
    out.iterations = iter + 1;
    if (out.assignments == previous) {
      out.converged = true;
      break;
    }
    previous = out.assignments;
    update_centroids(points, out.assignments, out.centroids);
  }
  if (!out.converged) {
    spdlog::info("k-means: no convergence after {} iterations", max_iterations);
  }
  out.silhouette = mean_silhouette(distances, out.assignments, out.k);
  return out;
}

KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed,
                               const DistanceMatrix& distances, std::size_t k_min,
                               std::size_t k_max) {
  if (points.size() < 3) {
    throw UndefinedError("silhouette selection needs at least three points");
  }
  if (k_min < 2 || k_max < k_min) {
    throw PreconditionError("invalid k range");
  }
  const std::size_t distinct = count_distinct(points);
  if (distinct < 2) throw DegenerateClustering(distinct);

  KSelection sel;
  bool have = false;
  for (std::size_t k = k_min; k <= k_max && k <= points.size(); ++k) {
    if (k > distinct) break;
    auto c = kmeans(points, k, seed, distances);
    sel.scores.emplace_back(k, c.silhouette);
    if (!have || c.silhouette > sel.clustering.silhouette) {
      sel.k = c.k;
      sel.clustering = std::move(c);
      have = true;
    }
  }
  if (!have) throw PreconditionError("k range is empty for these points");
  return sel;
}

KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed,
                               std::size_t k_min, std::size_t k_max) {
  DistanceMatrix dm(points);
  return silhouette_select_k(points, seed, dm, k_min, k_max);
}

KSelection silhouette_select_k(std::span<const Point> points, std::uint64_t seed) {
  if (points.size() < 3) {
    throw UndefinedError("silhouette selection needs at least three points");
  }
  return silhouette_select_k(points, seed, 2,
                             std::min(kDefaultMaxClusters, points.size() - 1));
}

}  // namespace warnbench

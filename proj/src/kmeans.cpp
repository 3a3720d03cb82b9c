#include <algorithm>
#include <limits>
#include <set>

#include "mgr/attacks.hpp"
#include "mgr/errors.hpp"

namespace mgr {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(std::span<const double> points, std::size_t dimension, std::size_t k,
                    std::size_t max_iterations) {
  if (dimension == 0) throw DataError("k-means needs at least one feature");
  if (points.size() % dimension != 0) throw DataError("point matrix is not n x dimension");
  const std::size_t n = points.size() / dimension;
  if (k == 0) throw ConfigError("k-means needs k >= 1");
  const auto point = [&](std::size_t i) { return points.subspan(i * dimension, dimension); };

  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < n && distinct.size() < k; ++i) {
    distinct.emplace(point(i).begin(), point(i).end());
  }
  if (distinct.size() < k) {
    throw DataError("k-means asked for " + std::to_string(k) + " clusters but only " +
                    std::to_string(distinct.size()) + " distinct points exist");
  }

  KMeansResult out;
  out.dimension = dimension;
  out.centers.assign(k * dimension, 0.0);
  const auto center = [&](std::size_t c) {
    return std::span<double>(out.centers).subspan(c * dimension, dimension);
  };

  // Farthest-point seeding from row 0.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(point(chosen).begin(), dimension, center(c).begin());
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(point(i), center(c)));
      if (nearest[i] > far) {
        far = nearest[i];
        next = i;
      }
    }
    chosen = next;
  }

  out.assignments.assign(n, k);  // k marks "unassigned" before the first pass
  std::vector<double> sums(k * dimension);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(point(i), center(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      distortion += best_d;
      if (out.assignments[i] != best) {
        out.assignments[i] = best;
        changed = true;
      }
    }
    out.distortion_history.push_back(distortion);
    out.iterations = it + 1;
    if (!changed) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = out.assignments[i];
      ++counts[c];
      for (std::size_t j = 0; j < dimension; ++j) sums[c * dimension + j] += point(i)[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an empty cluster keeps its center
      for (std::size_t j = 0; j < dimension; ++j) {
        center(c)[j] = sums[c * dimension + j] / static_cast<double>(counts[c]);
      }
    }
  }
  return out;
}

}  // namespace mgr

#pragma once
// Clustering primitives over dense vectors: seeded k-means++, DBSCAN and
// agglomerative clustering. All return labels canonicalized by first
// occurrence (the first point's cluster is 0, the next new cluster is 1, ...).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/error.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace {

enum class DistanceMetric { euclidean, cosine_distance };

inline std::string_view to_string(DistanceMetric m) {
  return m == DistanceMetric::euclidean ? "euclidean" : "cosine";
}

inline DistanceMetric parse_distance_metric(std::string_view s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "cosine" || s == "cosine_distance") return DistanceMetric::cosine_distance;
  throw ConfigError("unknown distance metric '" + std::string(s) + "'");
}

inline double distance(std::span<const double> u, std::span<const double> v, DistanceMetric m) {
  if (m == DistanceMetric::euclidean) return std::sqrt(squared_euclidean(u, v));
  const double nu = l2_norm(u), nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) throw ComputeError("cosine distance of a zero vector");
  return 1.0 - std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

inline constexpr int kNoise = -1;

struct Assignment {
  std::vector<int> labels;  // kNoise marks DBSCAN noise
  int cluster_count = 0;

  std::size_t noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
  }
  bool all_noise() const { return cluster_count == 0; }
};

// Relabels clusters in order of first occurrence; noise stays noise.
inline Assignment canonicalize(const std::vector<int>& raw) {
  Assignment out;
  out.labels.resize(raw.size(), kNoise);
  std::vector<std::pair<int, int>> seen;  // raw -> canonical
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == kNoise) continue;
    auto it = std::find_if(seen.begin(), seen.end(), [&](auto& p) { return p.first == raw[i]; });
    if (it == seen.end()) {
      seen.emplace_back(raw[i], out.cluster_count++);
      out.labels[i] = seen.back().second;
    } else {
      out.labels[i] = it->second;
    }
  }
  return out;
}

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
};

namespace detail {

struct KMeansRun {
  std::vector<int> labels;
  double inertia = 0.0;
};

inline KMeansRun kmeans_once(const std::vector<Vector>& points, std::size_t k,
                             std::size_t max_iter, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Vector> centers;
  centers.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.push_back(points[first(rng)]);

  // k-means++ seeding: next center drawn with probability proportional to D^2.
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_euclidean(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t chosen = 0;
    if (total <= 0.0) {
      // Fewer distinct points than k: fall back to any point.
      chosen = first(rng);
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng), acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && r < acc) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(points[chosen]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_euclidean(points[i], centers.back()));
    }
  }

  std::vector<int> labels(n, -1);
  const std::size_t dim = points.front().size();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_euclidean(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: reseed at the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = squared_euclidean(points[i], centers[static_cast<std::size_t>(labels[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[c] = points[far];
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += squared_euclidean(points[i], centers[static_cast<std::size_t>(labels[i])]);
  }
  return {std::move(labels), inertia};
}

inline void require_points(const std::vector<Vector>& points) {
  if (points.empty()) throw ComputeError("no points to cluster");
  for (const auto& p : points) require_same_dim(points.front(), p);
}

}  // namespace detail

// Lloyd's algorithm in Euclidean geometry with seeded k-means++ starts. The
// run with the lowest inertia wins; earlier restarts win ties.
inline Assignment kmeans(const std::vector<Vector>& points, std::size_t k,
                         const KMeansOptions& opts = {}) {
  detail::require_points(points);
  if (k < 2) throw ComputeError("kmeans: k must be at least 2");
  if (k > points.size()) throw ComputeError("kmeans: k exceeds number of points");
  if (opts.max_iter < 1) throw ComputeError("kmeans: max_iter must be at least 1");
  std::mt19937_64 rng(opts.seed);
  detail::KMeansRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.restarts); ++r) {
    auto run = detail::kmeans_once(points, k, opts.max_iter, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return canonicalize(best.labels);
}

// Density-based clustering. A point is core when at least min_pts points
// (itself included) lie within eps. Clusters are expanded from the
// lowest-index unvisited core point; a border point belongs to the first
// cluster whose expansion reaches it.
inline Assignment dbscan(const std::vector<Vector>& points, double eps, std::size_t min_pts,
                         DistanceMetric metric = DistanceMetric::euclidean) {
  detail::require_points(points);
  if (!(eps > 0.0)) throw ComputeError("dbscan: eps must be positive");
  if (min_pts < 1) throw ComputeError("dbscan: min_pts must be at least 1");
  const std::size_t n = points.size();

  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (i == j || distance(points[i], points[j], metric) <= eps) {
        nbrs[i].push_back(j);
        if (i != j) nbrs[j].push_back(i);
      }
    }
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());

  std::vector<int> labels(n, kNoise);
  std::vector<bool> visited(n, false);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i] || nbrs[i].size() < min_pts) continue;
    const int c = next++;
    std::deque<std::size_t> frontier{i};
    visited[i] = true;
    labels[i] = c;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      if (nbrs[p].size() < min_pts) continue;  // border: do not expand
      for (std::size_t q : nbrs[p]) {
        if (labels[q] == kNoise) labels[q] = c;
        if (!visited[q]) {
          visited[q] = true;
          frontier.push_back(q);
        }
      }
    }
  }
  return canonicalize(labels);
}

enum class Linkage { average, complete, single };

inline std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::single: return "single";
  }
  return "average";
}

inline Linkage parse_linkage(std::string_view s) {
  if (s == "average") return Linkage::average;
  if (s == "complete") return Linkage::complete;
  if (s == "single") return Linkage::single;
  throw ConfigError("unknown linkage '" + std::string(s) + "'");
}

// Bottom-up merging until k clusters remain. Each active cluster is keyed by
// its smallest member index; among equally close pairs the lexicographically
// smallest (i, j) key pair merges first.
inline Assignment agglomerative(const std::vector<Vector>& points, std::size_t k, Linkage linkage,
                                DistanceMetric metric = DistanceMetric::euclidean) {
  detail::require_points(points);
  const std::size_t n = points.size();
  if (k < 2 || k > n) throw ComputeError("agglomerative: k out of range");

  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = distance(points[i], points[j], metric);

  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<int> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = static_cast<int>(i);

  for (std::size_t clusters = n; clusters > k; --clusters) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d[i][j] < best) {
          best = d[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams update into slot bi (the smaller key).
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      double nd = 0.0;
      switch (linkage) {
        case Linkage::single: nd = std::min(d[bi][m], d[bj][m]); break;
        case Linkage::complete: nd = std::max(d[bi][m], d[bj][m]); break;
        case Linkage::average:
          nd = (static_cast<double>(size[bi]) * d[bi][m] + static_cast<double>(size[bj]) * d[bj][m]) /
               static_cast<double>(size[bi] + size[bj]);
          break;
      }
      d[bi][m] = d[m][bi] = nd;
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (auto& o : owner) {
      if (o == static_cast<int>(bj)) o = static_cast<int>(bi);
    }
  }
  return canonicalize(owner);
}

}  // namespace stylespace

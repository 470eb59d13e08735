#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "stylespace/clustering.hpp"

using namespace stylespace;

namespace {

using Partition = std::vector<int>;

Partition relabel(const Partition& raw) {
  std::map<int, int> m;
  Partition out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0) {
      out[i] = -1;
      continue;
    }
    auto it = m.find(raw[i]);
    if (it == m.end()) it = m.emplace(raw[i], static_cast<int>(m.size())).first;
    out[i] = it->second;
  }
  return out;
}

// Density reachability from scratch: connected components of core points,
// borders attached to the component whose lowest core index is smallest.
Partition dbscan_oracle(const std::vector<Vector>& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) { return std::sqrt(squared_euclidean(pts[i], pts[j])) <= eps; };
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c += near(i, j);
    core[i] = c >= min_pts;
  }
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = next;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (core[q] && comp[q] < 0 && near(p, q)) {
          comp[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  Partition out(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      out[i] = comp[i];
      continue;
    }
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && near(i, j) && (best < 0 || comp[j] < best)) best = comp[j];
    }
    out[i] = best;
  }
  return relabel(out);
}

double linkage_between(const std::vector<Vector>& pts, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b, Linkage l) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
  for (auto i : a)
    for (auto j : b) {
      const double d = std::sqrt(squared_euclidean(pts[i], pts[j]));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sum += d;
    }
  switch (l) {
    case Linkage::single: return lo;
    case Linkage::complete: return hi;
    case Linkage::average: return sum / static_cast<double>(a.size() * b.size());
  }
  return 0.0;
}

// Agglomeration recomputing linkage from member sets at every step.
Partition agglomerative_oracle(const std::vector<Vector>& pts, std::size_t k, Linkage l) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < pts.size(); ++i) clusters.push_back({i});
  while (clusters.size() > k) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    // Clusters stay sorted by smallest member, so index order is key order.
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = linkage_between(pts, clusters[i], clusters[j], l);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<long>(bj));
  }
  Partition out(pts.size());
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) out[i] = static_cast<int>(c);
  return relabel(out);
}

// Exhaustive minimum within-cluster sum of squares over all k-labelings.
std::pair<Partition, double> kmeans_oracle(const std::vector<Vector>& pts, std::size_t k) {
  const std::size_t n = pts.size(), dim = pts.front().size();
  Partition cur(n, 0), best;
  double best_sse = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
    if (i == n) {
      if (static_cast<std::size_t>(used) != k) return;
      double sse = 0.0;
      for (int c = 0; c < used; ++c) {
        Vector mean(dim, 0.0);
        double cnt = 0;
        for (std::size_t p = 0; p < n; ++p)
          if (cur[p] == c) {
            ++cnt;
            for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[p][d];
          }
        for (auto& x : mean) x /= cnt;
        for (std::size_t p = 0; p < n; ++p)
          if (cur[p] == c) sse += squared_euclidean(pts[p], mean);
      }
      if (sse < best_sse) {
        best_sse = sse;
        best = cur;
      }
      return;
    }
    // Canonical labelings only: point i may open at most one new cluster.
    for (int c = 0; c <= used && c < static_cast<int>(k); ++c) {
      cur[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return {best, best_sse};
}

double sse_of(const std::vector<Vector>& pts, const Partition& labels) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  double sse = 0.0;
  for (const auto& [c, idx] : members) {
    Vector mean(pts.front().size(), 0.0);
    for (auto i : idx)
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += pts[i][d] / static_cast<double>(idx.size());
    for (auto i : idx) sse += squared_euclidean(pts[i], mean);
  }
  return sse;
}

std::vector<Vector> blobs(std::size_t groups, std::size_t per, double spread, std::mt19937_64& rng,
                          std::size_t dim = 2) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<Vector> pts;
  for (std::size_t b = 0; b < groups; ++b)
    for (std::size_t i = 0; i < per; ++i) {
      Vector p(dim);
      for (std::size_t d = 0; d < dim; ++d) p[d] = 10.0 * static_cast<double>(b) * (d == 0 ? 1 : 0.5) + g(rng);
      pts.push_back(p);
    }
  return pts;
}

}  // namespace

TEST(Canonicalize, FirstOccurrenceOrder) {
  const auto a = canonicalize({5, 5, -1, 2, 5, 2, 9});
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, -1, 1, 0, 1, 2}));
  EXPECT_EQ(a.cluster_count, 3);
  EXPECT_EQ(a.noise_count(), 1u);
}

TEST(KMeans, TwoSeparatedPairs) {
  const std::vector<Vector> pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  const auto a = kmeans(pts, 2, {.seed = 3});
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(a.labels, kmeans_oracle(pts, 2).first);
  EXPECT_EQ(mean_of(std::vector<Vector>{pts[0], pts[1]}), (Vector{0, 0.5}));
}

TEST(KMeans, MatchesExhaustiveOptimumOnSeparatedData) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 2 + trial % 2;
    const auto pts = blobs(k, 3, 0.5, rng);
    const auto a = kmeans(pts, k, {.seed = static_cast<std::uint64_t>(trial)});
    const auto [best, sse] = kmeans_oracle(pts, k);
    EXPECT_EQ(a.labels, best);
    EXPECT_NEAR(sse_of(pts, a.labels), sse, 1e-9);
  }
}

TEST(KMeans, ResultIsLloydFixedPointOnRandomData) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> pts(8, Vector(2));
    for (auto& p : pts)
      for (auto& x : p) x = g(rng);
    const auto a = kmeans(pts, 3, {.seed = 1});
    std::vector<Vector> centers(3, Vector(2, 0.0));
    std::vector<double> counts(3, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto c = static_cast<std::size_t>(a.labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < 2; ++d) centers[c][d] += pts[i][d];
    }
    for (std::size_t c = 0; c < 3; ++c) {
      ASSERT_GT(counts[c], 0.0);
      for (auto& x : centers[c]) x /= counts[c];
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double own = squared_euclidean(pts[i], centers[static_cast<std::size_t>(a.labels[i])]);
      for (const auto& c : centers) EXPECT_LE(own, squared_euclidean(pts[i], c) + 1e-12);
    }
    EXPECT_GE(sse_of(pts, a.labels), kmeans_oracle(pts, 3).second - 1e-9);
  }
}

TEST(KMeans, DegenerateAndDeterministic) {
  const std::vector<Vector> pts{{0, 0}, {1, 0}, {5, 5}, {9, 1}};
  EXPECT_THROW(kmeans(pts, 1), ComputeError);
  EXPECT_THROW(kmeans(pts, 5), ComputeError);
  EXPECT_THROW(kmeans({}, 2), ComputeError);
  EXPECT_THROW(kmeans({{0, 0}, {1}}, 2), ComputeError);
  const auto all = kmeans(pts, 4);
  EXPECT_EQ(all.labels, (std::vector<int>{0, 1, 2, 3}));
  std::mt19937_64 rng(5);
  const auto many = blobs(4, 20, 3.0, rng, 5);
  EXPECT_EQ(kmeans(many, 6, {.seed = 9}).labels, kmeans(many, 6, {.seed = 9}).labels);
}

TEST(KMeans, DuplicatePointsStillYieldKClusters) {
  const std::vector<Vector> pts{{1, 1}, {1, 1}, {1, 1}, {2, 2}};
  const auto a = kmeans(pts, 2);
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0, 1}));
}

TEST(Dbscan, TwoBlobs) {
  std::mt19937_64 rng(6);
  const auto pts = blobs(2, 5, 0.1, rng);
  const auto a = dbscan(pts, 1.0, 3);
  EXPECT_EQ(a.cluster_count, 2);
  EXPECT_EQ(a.noise_count(), 0u);
  EXPECT_EQ(a.labels, dbscan_oracle(pts, 1.0, 3));
}

TEST(Dbscan, IsolatedPointIsNoiseAndIdenticalPointsFormOneCluster) {
  std::vector<Vector> pts{{0, 0}, {0, 0.1}, {0.1, 0}, {50, 50}};
  const auto a = dbscan(pts, 0.5, 2);
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0, kNoise}));
  const std::vector<Vector> same(6, Vector{1, 2, 3});
  for (std::size_t m = 1; m <= 6; ++m) {
    const auto s = dbscan(same, 0.01, m);
    EXPECT_EQ(s.cluster_count, 1);
    EXPECT_EQ(s.noise_count(), 0u);
  }
  EXPECT_TRUE(dbscan(same, 0.01, 7).all_noise());
  EXPECT_THROW(dbscan(pts, 0.0, 2), ComputeError);
  EXPECT_THROW(dbscan(pts, 1.0, 0), ComputeError);
}

TEST(Dbscan, MatchesReachabilityOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<Vector> pts(n, Vector(2));
    for (auto& p : pts)
      for (auto& x : p) x = u(rng);
    const double eps = 0.3 + static_cast<double>(rng() % 10) * 0.15;
    const std::size_t min_pts = 1 + rng() % 4;
    EXPECT_EQ(dbscan(pts, eps, min_pts).labels, dbscan_oracle(pts, eps, min_pts)) << "trial " << trial;
  }
}

TEST(Dbscan, CosineMetric) {
  const std::vector<Vector> pts{{1, 0}, {2, 0.01}, {0, 1}, {0.01, 3}};
  EXPECT_EQ(dbscan(pts, 0.01, 2, DistanceMetric::cosine_distance).labels, (std::vector<int>{0, 0, 1, 1}));
}

TEST(Agglomerative, OneDimensionalExampleAnyLinkage) {
  const std::vector<Vector> pts{{0}, {1}, {10}};
  for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) {
    EXPECT_EQ(agglomerative(pts, 2, l).labels, (std::vector<int>{0, 0, 1}));
  }
  EXPECT_EQ(agglomerative(pts, 3, Linkage::average).labels, (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(agglomerative(pts, 1, Linkage::average), ComputeError);
  EXPECT_THROW(agglomerative(pts, 4, Linkage::average), ComputeError);
}

TEST(Agglomerative, EquidistantTieMergesFirstPair) {
  // Unit basis vectors: every pairwise distance is exactly sqrt(2).
  const std::vector<Vector> pts{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) {
    EXPECT_EQ(agglomerative(pts, 2, l).labels, (std::vector<int>{0, 0, 1}));
  }
  EXPECT_EQ(agglomerative({{0}, {1}, {2}}, 2, Linkage::single).labels, (std::vector<int>{0, 0, 1}));
}

TEST(Agglomerative, MatchesRecomputingOracle) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 3 + rng() % 9;
    std::vector<Vector> pts(n, Vector(3));
    for (auto& p : pts)
      for (auto& x : p) x = g(rng);
    const std::size_t k = 2 + rng() % (n - 1);
    for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) {
      EXPECT_EQ(agglomerative(pts, k, l).labels, agglomerative_oracle(pts, k, l))
          << "trial " << trial << " linkage " << to_string(l);
    }
  }
}

TEST(Agglomerative, TwoPartitionMinimizesLinkageOnSeparatedData) {
  // With two well-separated groups the 2-cluster cut is the 2-partition with
  // the largest between-group linkage; check it by enumeration.
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pts = blobs(2, 3 + trial % 3, 0.4, rng);
    const std::size_t n = pts.size();
    double best = -1;
    Partition best_p;
    for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<std::size_t> a, b;
      Partition p(n);
      for (std::size_t i = 0; i < n; ++i) {
        const bool in = (mask >> i) & 1u;
        (in ? a : b).push_back(i);
        p[i] = in;
      }
      const double d = linkage_between(pts, a, b, Linkage::single);
      if (d > best) {
        best = d;
        best_p = relabel(p);
      }
    }
    for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) {
      EXPECT_EQ(agglomerative(pts, 2, l).labels, best_p);
    }
  }
}

TEST(ParseEnums, RoundTrip) {
  for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) EXPECT_EQ(parse_linkage(to_string(l)), l);
  EXPECT_EQ(parse_distance_metric("cosine"), DistanceMetric::cosine_distance);
  EXPECT_EQ(parse_distance_metric("euclidean"), DistanceMetric::euclidean);
  EXPECT_THROW(parse_linkage("ward"), ConfigError);
  EXPECT_THROW(parse_distance_metric("manhattan"), ConfigError);
}

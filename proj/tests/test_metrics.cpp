#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "stylespace/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace stylespace;

namespace {

// Euclidean distances between random points: a metric of negative type, so
// the squared distance covariance is non-negative.
Eigen::MatrixXd random_distances(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vector> pts(static_cast<std::size_t>(n), Vector(3));
  for (auto& p : pts)
    for (auto& x : p) x = g(rng);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = std::sqrt(squared_euclidean(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]));
  return m;
}

Eigen::MatrixXd random_dissimilarity(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1}, std::vector<double>{2, 2}), 1.0, 1e-15);
  EXPECT_NEAR(cosine(std::vector<double>{3, 4}, std::vector<double>{4, 3}), 0.96, 1e-15);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), ComputeError);
  EXPECT_THROW(cosine(std::vector<double>{1}, std::vector<double>{1, 0}), ComputeError);
}

TEST(Project, Examples) {
  const InterpretableBasis basis(BasisSource::clustered, {{0, {1, 0, 0}, {"a"}, {}}, {1, {0, 1, 0}, {"b"}, {}}});
  EXPECT_EQ(project("d", std::vector<double>{1, 0, 0}, basis).coords, (Vector{1, 0}));
  EXPECT_EQ(project("d", std::vector<double>{0, 0, 5}, basis).coords, (Vector{0, 0}));
  const Vector e{0.3, -2.0, 1.0};
  const auto c = project("d", e, basis).coords;
  EXPECT_DOUBLE_EQ(c[0], cosine(e, basis[0].centroid));
  EXPECT_DOUBLE_EQ(c[1], cosine(e, basis[1].centroid));
  EXPECT_THROW(project("d", std::vector<double>{1, 0}, basis), ComputeError);
  EXPECT_THROW(project("d", std::vector<double>{0, 0, 0}, basis), ComputeError);
}

TEST(PairScores, Examples) {
  const VectorLookup v{{"a", {1, 2}}, {"b", {1, 2}}, {"c", {-2, 1}}};
  const auto s = pair_scores({{"a", "b", true}, {"a", "c", false}}, v);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0], 1.0, 1e-15);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_TRUE(pair_scores({}, v).empty());
  EXPECT_THROW(pair_scores({{"a", "zz", false}}, v), ComputeError);
}

TEST(Eer, Examples) {
  EXPECT_DOUBLE_EQ(eer(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {true, true, false, false}), 0.0);
  EXPECT_DOUBLE_EQ(eer(std::vector<double>{0.9, 0.1, 0.8, 0.2}, {true, true, false, false}), 0.5);
  EXPECT_DOUBLE_EQ(eer(std::vector<double>{0.1, 0.2, 0.8, 0.9}, {true, true, false, false}), 1.0);
  EXPECT_THROW(eer(std::vector<double>{0.1, 0.2}, {true, true}), ComputeError);
  EXPECT_THROW(eer(std::vector<double>{0.1}, {true, false}), ComputeError);
}

TEST(AveragePrecision, Examples) {
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{4, 3, 2, 1}, {true, true, false, false}), 1.0);
  EXPECT_NEAR(average_precision(std::vector<double>{4, 3, 2, 1}, {true, false, true, false}), 0.833333, 1e-6);
  EXPECT_NEAR(average_precision(std::vector<double>{4, 3, 2, 1}, {false, false, true, true}), 0.416667, 1e-6);
  EXPECT_THROW(average_precision(std::vector<double>{1, 2}, {false, false}), ComputeError);
}

TEST(RankMetrics, MatchBruteForceOracles) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    // Coarse scores on some trials so ties are common.
    const bool coarse = trial % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng() % 5) / 4.0 : std::uniform_real_distribution<double>(-1, 1)(rng);
      y[i] = rng() % 2;
    }
    y[0] = true;
    y[1] = false;
    EXPECT_NEAR(eer(s, y), oracle::eer(s, y), 1e-9);
    EXPECT_NEAR(average_precision(s, y), oracle::average_precision(s, y), 1e-9);
    const double e = eer(s, y), ap = average_precision(s, y);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
  }
}

TEST(RankMetrics, PositiveScalingInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng() % 40;
    std::vector<double> s(n), scaled(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      scaled[i] = 8.0 * s[i];  // power of two keeps midpoints exact
      y[i] = i % 2;
    }
    EXPECT_DOUBLE_EQ(eer(s, y), eer(scaled, y));
    EXPECT_DOUBLE_EQ(average_precision(s, y), average_precision(scaled, y));
    std::vector<double> other(n), other_scaled(n);
    for (std::size_t i = 0; i < n; ++i) other_scaled[i] = 3.0 * (other[i] = u(rng));
    EXPECT_NEAR(alignment_report(s, other, y).pearson_r, alignment_report(s, other_scaled, y).pearson_r, 1e-12);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(pearson(x, std::vector<double>{3, 5, 7, 9}), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{-1, -2, -3, -4}), -1.0, 1e-15);
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 1, 1, 1}), ComputeError);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ComputeError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ComputeError);
}

TEST(PairwiseDissimilarity, Examples) {
  const auto same = pairwise_dissimilarity({{"a", {1, 2}}, {"b", {1, 2}}}, DissimilarityMetric::cosine_distance);
  EXPECT_NEAR(same.values.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  const auto orth = pairwise_dissimilarity({{"a", {1, 0}}, {"b", {0, 1}}}, DissimilarityMetric::cosine_distance);
  EXPECT_DOUBLE_EQ(orth.values(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(orth.values(1, 0), 1.0);

  std::mt19937_64 rng(2);
  std::vector<LabeledVector> items;
  for (int i = 0; i < 3; ++i) items.push_back({"d" + std::to_string(i), testing_support::random_simplex(6, rng)});
  const auto kl = pairwise_dissimilarity(items, DissimilarityMetric::symmetric_kl);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(kl.values(i, i), 0.0);
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(kl.values(i, j), kl.values(j, i));
      if (i != j) {
        EXPECT_EQ(kl.values(i, j), sym_kl(items[i].values, items[j].values));
      }
    }
  }
  EXPECT_EQ(kl.upper_triangle().size(), 3u);
  EXPECT_THROW(pairwise_dissimilarity({{"a", {1, 0}}}, DissimilarityMetric::cosine_distance), ComputeError);
  EXPECT_THROW(pairwise_dissimilarity({{"a", {1, 0}}, {"b", {0, 0}}}, DissimilarityMetric::cosine_distance),
               ComputeError);
  EXPECT_THROW(pairwise_dissimilarity({{"a", {0.5, 0.5}}, {"b", {2.0, 0.0}}}, DissimilarityMetric::symmetric_kl),
               ComputeError);
}

TEST(DistanceCorrelation, ScaleInvarianceAndConvention) {
  std::mt19937_64 rng(4);
  const auto d = random_dissimilarity(6, rng);
  EXPECT_NEAR(distance_correlation(d, 3.0 * d), 1.0, 1e-9);
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(6, 6);
  EXPECT_EQ(distance_correlation(flat, d), 0.0);
  EXPECT_THROW(distance_correlation(random_dissimilarity(2, rng), random_dissimilarity(2, rng)), ComputeError);
  EXPECT_THROW(distance_correlation(random_dissimilarity(4, rng), random_dissimilarity(5, rng)), ComputeError);
}

TEST(DistanceCorrelation, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  for (Eigen::Index n = 4; n <= 8; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_distances(n, rng), y = random_distances(n, rng);
      EXPECT_NEAR(distance_correlation(x, y), oracle::dcor(x, y), 1e-12);
    }
  }
}

TEST(Alignment, IdenticalAndShuffled) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> s;
  std::vector<bool> y;
  for (int i = 0; i < 400; ++i) {
    y.push_back(i % 2);
    s.push_back(g(rng) + (i % 2 ? 2.0 : 0.0));
  }
  const auto same = alignment_report(s, s, y);
  EXPECT_EQ(same.delta_eer, 0.0);
  EXPECT_EQ(same.delta_ap, 0.0);
  EXPECT_NEAR(same.pearson_r, 1.0, 1e-12);
  auto shuffled = s;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto r = alignment_report(s, shuffled, y);
  EXPECT_LT(std::abs(r.pearson_r), 0.2);
  EXPECT_GT(r.delta_eer, 0.2);
  EXPECT_GT(r.delta_ap, 0.2);
  const auto j = to_json(r);
  EXPECT_EQ(j.begin().key(), "latent_eer");
  EXPECT_EQ(j.size(), 7u);
}

TEST(RepresentationCorrelation, SameAndIndependent) {
  std::mt19937_64 rng(31);
  const auto a = random_dissimilarity(50, rng), b = random_dissimilarity(50, rng), c = random_dissimilarity(50, rng);
  std::vector<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.push_back(std::to_string(i));
  const DissimilarityMatrix latent{ids, a}, style{ids, a}, topic{ids, b};
  const auto r = representation_correlation(latent, style, topic);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].pair, "latent-style");
  EXPECT_NEAR(r[0].pearson, 1.0, 1e-12);
  EXPECT_NEAR(r[0].dcor, 1.0, 1e-12);
  const auto ind = representation_correlation(latent, DissimilarityMatrix{ids, c}, topic);
  for (const auto& e : ind) EXPECT_LT(std::abs(e.pearson), 0.3) << e.pair;
  auto other = ids;
  other[0] = "x";
  EXPECT_THROW(representation_correlation(latent, style, DissimilarityMatrix{other, b}), ComputeError);
}

TEST(RepresentationCorrelation, IndependentMatricesStayLowOnAverage) {
  // The biased dCor is inflated at n = 50 even under independence, so the
  // bound applies to the mean over draws; single draws reach about 0.37.
  std::mt19937_64 rng(37);
  std::vector<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.push_back(std::to_string(i));
  const int draws = 50;
  double pearson_sum = 0.0, dcor_sum = 0.0;
  for (int d = 0; d < draws; ++d) {
    const DissimilarityMatrix x{ids, random_dissimilarity(50, rng)}, y{ids, random_dissimilarity(50, rng)},
        z{ids, random_dissimilarity(50, rng)};
    for (const auto& e : representation_correlation(x, y, z)) {
      pearson_sum += std::abs(e.pearson) / (3.0 * draws);
      dcor_sum += e.dcor / (3.0 * draws);
    }
  }
  EXPECT_LT(pearson_sum, 0.3);
  EXPECT_LT(dcor_sum, 0.3);
}

TEST(RocCsv, PointsAtEveryUniqueScore) {
  std::ostringstream out;
  write_roc_csv(std::vector<double>{0.9, 0.5, 0.5, 0.1}, {true, false, true, false}, out);
  EXPECT_EQ(out.str(), "threshold,fpr,tpr\n0.10000000000000001,1,1\n0.5,0.5,1\n0.90000000000000002,0,0.5\n");
}

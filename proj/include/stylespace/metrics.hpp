#pragma once
// Projection into the interpretable space, verification scoring and the
// evaluation statistics: EER, average precision, Pearson r, dissimilarity
// matrices and distance correlation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stylespace/basis.hpp"
#include "stylespace/corpus.hpp"
#include "stylespace/distributions.hpp"
#include "stylespace/error.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace {

inline double cosine(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u, v);
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) throw ComputeError("cosine of a zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

struct ProjectionVector {
  std::string doc_id;
  Vector coords;  // cosine to each basis point, in basis order
};

inline ProjectionVector project(std::string doc_id, std::span<const double> embedding,
                                const InterpretableBasis& basis) {
  if (embedding.size() != basis.dim()) {
    throw ComputeError("dimension mismatch: embedding " + std::to_string(embedding.size()) +
                       " vs basis " + std::to_string(basis.dim()));
  }
  if (l2_norm(embedding) == 0.0) throw ComputeError("cannot project a zero embedding");
  ProjectionVector out{std::move(doc_id), {}};
  out.coords.reserve(basis.k());
  for (const auto& p : basis.points()) out.coords.push_back(cosine(embedding, p.centroid));
  return out;
}

using VectorLookup = std::unordered_map<std::string, Vector>;

// Cosine score per pair, order preserved.
inline std::vector<double> pair_scores(const std::vector<PairExample>& pairs,
                                       const VectorLookup& vectors) {
  std::vector<double> out;
  out.reserve(pairs.size());
  auto find = [&](const std::string& id) -> const Vector& {
    auto it = vectors.find(id);
    if (it == vectors.end()) throw ComputeError("missing vector for doc " + id);
    return it->second;
  };
  for (const auto& p : pairs) out.push_back(cosine(find(p.doc_a), find(p.doc_b)));
  return out;
}

inline std::vector<bool> labels_of(const std::vector<PairExample>& pairs) {
  std::vector<bool> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

namespace detail {

inline void require_scored(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw ComputeError("scores and labels differ in length");
}

}  // namespace detail

// Equal error rate. Thresholds are -inf, midpoints between adjacent unique
// scores, and +inf; a score >= threshold predicts "same author". Walking up the
// thresholds, FPR falls and FNR rises. The result is the common value where
// they meet, interpolated linearly when they cross between two thresholds.
inline double eer(std::span<const double> scores, const std::vector<bool>& labels) {
  detail::require_scored(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw ComputeError("eer needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  const double P = static_cast<double>(positives);
  const double N = static_cast<double>(negatives);
  // Lowest threshold: everything predicted positive.
  std::size_t fn = 0, tn = 0;
  double prev_fpr = 1.0, prev_fnr = 0.0;
  std::size_t i = 0;
  while (true) {
    const double fpr = 1.0 - static_cast<double>(tn) / N;
    const double fnr = static_cast<double>(fn) / P;
    const double d = fpr - fnr;
    if (d == 0.0) return fpr;
    if (d < 0.0) {
      const double prev_d = prev_fpr - prev_fnr;
      const double alpha = prev_d / (prev_d - d);
      return prev_fpr + alpha * (fpr - prev_fpr);
    }
    prev_fpr = fpr;
    prev_fnr = fnr;
    // Raise the threshold past the next group of tied scores.
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]]) ++fn; else ++tn;
      ++i;
    }
  }
}

// Ranked by descending score, ties in input order.
inline double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
  detail::require_scored(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) throw ComputeError("average precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ComputeError("pearson: length mismatch");
  if (x.size() < 2) throw ComputeError("pearson needs at least 2 observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ComputeError("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

enum class DissimilarityMetric { cosine_distance, symmetric_kl };

inline std::string_view to_string(DissimilarityMetric m) {
  return m == DissimilarityMetric::cosine_distance ? "cosine_distance" : "symmetric_kl";
}

struct DissimilarityMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
  DissimilarityMetric metric = DissimilarityMetric::cosine_distance;

  std::size_t size() const noexcept { return ids.size(); }

  // Row-major upper triangle, diagonal excluded.
  std::vector<double> upper_triangle() const {
    std::vector<double> out;
    const auto n = values.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) out.push_back(values(i, j));
    return out;
  }
};

struct LabeledVector {
  std::string id;
  Vector values;
};

// Cosine metric: 1 - cosine. KL metric: sym_kl over distributions.
inline DissimilarityMatrix pairwise_dissimilarity(const std::vector<LabeledVector>& items,
                                                  DissimilarityMetric metric,
                                                  double kl_eps = kDefaultKlEps) {
  if (items.size() < 2) throw ComputeError("pairwise dissimilarity needs at least 2 items");
  const std::size_t n = items.size();
  const std::size_t len = items.front().values.size();
  for (const auto& it : items) {
    if (it.values.size() != len) throw ComputeError("items differ in dimension");
    if (metric == DissimilarityMetric::cosine_distance) {
      if (l2_norm(it.values) == 0.0) throw ComputeError("degenerate vector for " + it.id);
    } else {
      double s = 0.0;
      for (double x : it.values) {
        if (x < 0.0) throw ComputeError("negative probability in " + it.id);
        s += x;
      }
      if (std::abs(s - 1.0) > 1e-6) throw ComputeError(it.id + " is not a distribution");
    }
  }
  DissimilarityMatrix out;
  out.metric = metric;
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& it : items) out.ids.push_back(it.id);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric == DissimilarityMetric::cosine_distance
                           ? 1.0 - cosine(items[i].values, items[j].values)
                           : sym_kl(items[i].values, items[j].values, kl_eps);
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      out.values(a, b) = d;
      out.values(b, a) = d;
    }
  }
  return out;
}

namespace detail {

inline Eigen::MatrixXd double_center(const Eigen::MatrixXd& d) {
  const Eigen::VectorXd row_mean = d.rowwise().mean();
  const Eigen::RowVectorXd col_mean = d.colwise().mean();
  const double grand = d.mean();
  Eigen::MatrixXd a = d;
  a.colwise() -= row_mean;
  a.rowwise() -= col_mean;
  a.array() += grand;
  return a;
}

}  // namespace detail

// Biased (V-statistic) distance correlation between two dissimilarity
// matrices over the same entities. Returns 0 when either side has zero
// distance variance.
inline double distance_correlation(const Eigen::MatrixXd& dx, const Eigen::MatrixXd& dy) {
  if (dx.rows() != dx.cols() || dy.rows() != dy.cols() || dx.rows() != dy.rows()) {
    throw ComputeError("distance correlation: size mismatch");
  }
  if (dx.rows() < 3) throw ComputeError("distance correlation needs at least 3 entities");
  const auto a = detail::double_center(dx);
  const auto b = detail::double_center(dy);
  const double dcov2 = (a.array() * b.array()).mean();
  const double vx = (a.array() * a.array()).mean();
  const double vy = (b.array() * b.array()).mean();
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  const double r2 = dcov2 / std::sqrt(vx * vy);
  return std::sqrt(std::clamp(r2, 0.0, 1.0));
}

inline double distance_correlation(const DissimilarityMatrix& dx, const DissimilarityMatrix& dy) {
  if (dx.ids != dy.ids) throw ComputeError("distance correlation: entity mismatch");
  return distance_correlation(dx.values, dy.values);
}

struct AlignmentReport {
  double latent_eer = 0.0;
  double latent_ap = 0.0;
  double interp_eer = 0.0;
  double interp_ap = 0.0;
  double delta_eer = 0.0;  // interp - latent
  double delta_ap = 0.0;   // latent - interp
  double pearson_r = 0.0;
};

inline AlignmentReport alignment_report(std::span<const double> latent_scores,
                                        std::span<const double> interp_scores,
                                        const std::vector<bool>& labels) {
  if (latent_scores.size() != interp_scores.size()) {
    throw ComputeError("latent and interpretable score lists differ in length");
  }
  AlignmentReport r;
  r.latent_eer = eer(latent_scores, labels);
  r.latent_ap = average_precision(latent_scores, labels);
  r.interp_eer = eer(interp_scores, labels);
  r.interp_ap = average_precision(interp_scores, labels);
  r.delta_eer = r.interp_eer - r.latent_eer;
  r.delta_ap = r.latent_ap - r.interp_ap;
  r.pearson_r = pearson(latent_scores, interp_scores);
  return r;
}

inline nlohmann::ordered_json to_json(const AlignmentReport& r) {
  nlohmann::ordered_json j;
  j["latent_eer"] = r.latent_eer;
  j["latent_ap"] = r.latent_ap;
  j["interp_eer"] = r.interp_eer;
  j["interp_ap"] = r.interp_ap;
  j["delta_eer"] = r.delta_eer;
  j["delta_ap"] = r.delta_ap;
  j["pearson_r"] = r.pearson_r;
  return j;
}

struct CorrelationEntry {
  std::string pair;  // e.g. "latent-style"
  double pearson = 0.0;
  double dcor = 0.0;
};

// Pearson over upper triangles and dCor over full matrices for each of
// latent-style, latent-topic and style-topic.
inline std::vector<CorrelationEntry> representation_correlation(const DissimilarityMatrix& latent,
                                                                const DissimilarityMatrix& style,
                                                                const DissimilarityMatrix& topic) {
  if (latent.ids != style.ids || latent.ids != topic.ids) {
    throw ComputeError("representation matrices cover different entities");
  }
  auto entry = [](std::string name, const DissimilarityMatrix& a, const DissimilarityMatrix& b) {
    return CorrelationEntry{std::move(name), pearson(a.upper_triangle(), b.upper_triangle()),
                            distance_correlation(a, b)};
  };
  return {entry("latent-style", latent, style), entry("latent-topic", latent, topic),
          entry("style-topic", style, topic)};
}

inline nlohmann::ordered_json to_json(const std::vector<CorrelationEntry>& entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["pair"] = e.pair;
    j["pearson"] = e.pearson;
    j["dcor"] = e.dcor;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline void write_matrix_csv(const DissimilarityMatrix& m, std::ostream& out) {
  out.precision(17);
  out << "id";
  for (const auto& id : m.ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.ids[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      out << ',' << m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out << '\n';
  }
}

// Raw ROC points (threshold, fpr, tpr) at every unique score.
inline void write_roc_csv(std::span<const double> scores, const std::vector<bool>& labels,
                          std::ostream& out) {
  detail::require_scored(scores, labels);
  std::vector<double> uniq(scores.begin(), scores.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const auto neg = static_cast<double>(labels.size()) - pos;
  out.precision(17);
  out << "threshold,fpr,tpr\n";
  for (double t : uniq) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] ? tp : fp) += 1;
    }
    out << t << ',' << (neg > 0 ? fp / neg : 0.0) << ',' << (pos > 0 ? tp / pos : 0.0) << '\n';
  }
}

}  // namespace stylespace

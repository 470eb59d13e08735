#pragma once
// Style distributions over a feature catalog, symmetrized KL divergence and
// the running-average stability statistic.

#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/error.hpp"

namespace stylespace {

inline constexpr double kDefaultKlEps = 1e-9;

enum class CountScope { cluster, corpus, round };

// Occurrence counts per feature id. Dense, indexed by feature id.
struct FeatureCounts {
  std::vector<std::size_t> counts;
  CountScope scope = CountScope::cluster;

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

// Probability vector over catalog feature ids.
class StyleDistribution {
 public:
  StyleDistribution() = default;

  // Normalizes non-negative weights onto the simplex.
  static StyleDistribution from_weights(std::vector<double> w) {
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw ComputeError("distribution weights must be finite and non-negative");
      }
      sum += x;
    }
    if (sum <= 0.0) throw ComputeError("all-zero weights cannot form a distribution");
    for (double& x : w) x /= sum;
    StyleDistribution d;
    d.probs_ = std::move(w);
    return d;
  }

  // Keeps the given probabilities as they are; they must already sum to one.
  static StyleDistribution from_probs(std::vector<double> p) {
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ComputeError("probabilities must be finite and non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ComputeError("probabilities do not sum to one");
    StyleDistribution d;
    d.probs_ = std::move(p);
    return d;
  }

  static StyleDistribution from_counts(const FeatureCounts& c) {
    return from_weights(std::vector<double>(c.counts.begin(), c.counts.end()));
  }

  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

// Score per feature is cluster_count / corpus_count, renormalized to sum to one.
inline StyleDistribution assign_distribution(const FeatureCounts& cluster,
                                             const FeatureCounts& corpus) {
  if (cluster.counts.size() != corpus.counts.size()) {
    throw ComputeError("cluster and corpus counts cover different catalogs");
  }
  std::vector<double> raw(cluster.counts.size(), 0.0);
  bool any = false;
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (cluster.counts[f] == 0) continue;
    if (corpus.counts[f] < cluster.counts[f]) {
      throw ComputeError("corpus count below cluster count for feature " + std::to_string(f));
    }
    raw[f] = static_cast<double>(cluster.counts[f]) / static_cast<double>(corpus.counts[f]);
    any = true;
  }
  if (!any) throw ComputeError("cluster has no feature occurrences");
  return StyleDistribution::from_weights(std::move(raw));
}

namespace detail {

inline std::vector<double> smooth(std::span<const double> p, double eps) {
  std::vector<double> out(p.begin(), p.end());
  double sum = 0.0;
  for (double& x : out) {
    x += eps;
    sum += x;
  }
  for (double& x : out) x /= sum;
  return out;
}

}  // namespace detail

// 0.5 * (KL(p||q) + KL(q||p)) in nats after additive smoothing by eps.
inline double sym_kl(std::span<const double> p, std::span<const double> q,
                     double eps = kDefaultKlEps) {
  if (p.size() != q.size()) throw ComputeError("sym_kl: length mismatch");
  if (!(eps > 0.0)) throw ComputeError("sym_kl: eps must be positive");
  const auto ps = detail::smooth(p, eps);
  const auto qs = detail::smooth(q, eps);
  // Both directions combine into sum (p - q) * (log p - log q), which is
  // exactly antisymmetric term by term.
  double s = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) s += (ps[i] - qs[i]) * (std::log(ps[i]) - std::log(qs[i]));
  return 0.5 * s;
}

inline double sym_kl(const StyleDistribution& p, const StyleDistribution& q,
                     double eps = kDefaultKlEps) {
  return sym_kl(p.probs(), q.probs(), eps);
}

struct StabilityPoint {
  std::size_t t = 0;
  double value = 0.0;   // S_t
  double stddev = 0.0;  // across repeats; 0 for a single run
};

struct StabilityTrace {
  std::vector<StabilityPoint> series;  // t = 2..T
};

// vbar_t is the unweighted mean of rounds 1..t; S_t = sym_kl(vbar_t, vbar_{t-1}).
inline StabilityTrace stability_trace(const std::vector<StyleDistribution>& rounds,
                                      double eps = kDefaultKlEps) {
  if (rounds.size() < 2) throw ComputeError("stability trace needs at least 2 rounds");
  const std::size_t k = rounds.front().size();
  std::vector<double> sum(k, 0.0), prev(k), cur(k);
  StabilityTrace trace;
  for (std::size_t t = 1; t <= rounds.size(); ++t) {
    const auto& v = rounds[t - 1];
    if (v.size() != k) throw ComputeError("rounds cover different catalogs");
    for (std::size_t i = 0; i < k; ++i) {
      sum[i] += v[i];
      cur[i] = sum[i] / static_cast<double>(t);
    }
    if (t >= 2) trace.series.push_back({t, sym_kl(cur, prev, eps), 0.0});
    prev.swap(cur);
  }
  return trace;
}

// Pointwise mean and population standard deviation across equally long traces.
inline StabilityTrace aggregate_traces(const std::vector<StabilityTrace>& runs) {
  if (runs.empty()) throw ComputeError("no traces to aggregate");
  const std::size_t len = runs.front().series.size();
  StabilityTrace out;
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0;
    for (const auto& r : runs) {
      if (r.series.size() != len) throw ComputeError("traces differ in length");
      mean += r.series[i].value;
    }
    mean /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& r : runs) var += (r.series[i].value - mean) * (r.series[i].value - mean);
    var /= static_cast<double>(runs.size());
    out.series.push_back({runs.front().series[i].t, mean, std::sqrt(var)});
  }
  return out;
}

inline void write_trace_csv(const StabilityTrace& trace, std::ostream& out) {
  out << "t,S_t,stddev\n";
  out.precision(17);
  for (const auto& p : trace.series) out << p.t << ',' << p.value << ',' << p.stddev << '\n';
}

inline StabilityTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,S_t,stddev", 0) != 0) {
    throw SchemaError("trace CSV must start with header t,S_t,stddev");
  }
  StabilityTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, s, sd;
    if (!std::getline(row, t, ',') || !std::getline(row, s, ',') || !std::getline(row, sd)) {
      throw SchemaError("malformed trace row: " + line);
    }
    try {
      trace.series.push_back({std::stoul(t), std::stod(s), std::stod(sd)});
    } catch (const std::exception&) {
      throw SchemaError("malformed trace row: " + line);
    }
  }
  return trace;
}

// Sparse JSON form: {"feature_id": probability} for non-zero entries.
inline nlohmann::ordered_json distribution_to_json(const StyleDistribution& d) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < d.size(); ++f) {
    if (d[f] > 0.0) obj[std::to_string(f)] = d[f];
  }
  return obj;
}

inline StyleDistribution distribution_from_json(const nlohmann::json& obj,
                                                std::size_t catalog_size) {
  std::vector<double> w(catalog_size, 0.0);
  for (const auto& [key, value] : obj.items()) {
    std::size_t f = 0;
    try {
      f = std::stoul(key);
    } catch (const std::exception&) {
      throw SchemaError("distribution key is not a feature id: " + key);
    }
    if (f >= catalog_size) throw SchemaError("feature id out of range: " + key);
    w[f] = value.get<double>();
  }
  try {
    return StyleDistribution::from_probs(std::move(w));
  } catch (const ComputeError& e) {
    throw SchemaError(std::string("invalid distribution: ") + e.what());
  }
}

}  // namespace stylespace

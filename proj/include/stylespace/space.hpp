#pragma once
// Author embeddings, representative points and the interpretable-space bases:
// clustered (with a parameter sweep), random and predefined-feature.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/basis.hpp"
#include "stylespace/clustering.hpp"
#include "stylespace/corpus.hpp"
#include "stylespace/error.hpp"
#include "stylespace/metrics.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace {

inline constexpr double kDefaultPlateauTolerance = 0.02;

struct AuthorEmbedding {
  std::string author_id;
  Vector vector;  // mean of the author's document embeddings
  std::size_t doc_count = 0;
  std::vector<std::string> doc_ids;
};

inline std::vector<AuthorEmbedding> author_embeddings(const Corpus& corpus, Split split) {
  std::vector<AuthorEmbedding> out;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::span<const double>>> rows;
  for (std::size_t i : corpus.indices_in(split)) {
    const auto& r = corpus.records()[i];
    auto [it, inserted] = slot.emplace(r.author_id, out.size());
    if (inserted) {
      out.push_back({r.author_id, {}, 0, {}});
      rows.emplace_back();
    }
    out[it->second].doc_ids.push_back(r.doc_id);
    rows[it->second].push_back(r.embedding);
  }
  if (out.empty()) throw ComputeError("split " + std::string(to_string(split)) + " is empty");
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a].vector = mean_of(rows[a]);
    out[a].doc_count = rows[a].size();
  }
  return out;
}

inline std::vector<Vector> vectors_of(const std::vector<AuthorEmbedding>& authors) {
  std::vector<Vector> out;
  out.reserve(authors.size());
  for (const auto& a : authors) out.push_back(a.vector);
  return out;
}

// One representative point per non-noise cluster, in canonical label order.
inline InterpretableBasis centroids_to_basis(const Assignment& assignment,
                                             const std::vector<AuthorEmbedding>& authors) {
  if (assignment.labels.size() != authors.size()) {
    throw ComputeError("assignment does not cover the author embeddings");
  }
  if (assignment.cluster_count < 1) throw ComputeError("no representative points: all points are noise");
  if (assignment.cluster_count < 2) {
    throw ComputeError("fewer than 2 clusters; cannot form a basis");
  }
  std::vector<RepresentativePoint> points(static_cast<std::size_t>(assignment.cluster_count));
  std::vector<std::vector<std::span<const double>>> members(points.size());
  for (std::size_t i = 0; i < authors.size(); ++i) {
    const int c = assignment.labels[i];
    if (c == kNoise) continue;
    auto& p = points[static_cast<std::size_t>(c)];
    p.member_authors.push_back(authors[i].author_id);
    p.member_docs.insert(p.member_docs.end(), authors[i].doc_ids.begin(), authors[i].doc_ids.end());
    members[static_cast<std::size_t>(c)].push_back(authors[i].vector);
  }
  for (std::size_t c = 0; c < points.size(); ++c) {
    points[c].point_id = c;
    points[c].centroid = mean_of(members[c]);
  }
  return InterpretableBasis(BasisSource::clustered, std::move(points));
}

enum class Algorithm { kmeans, dbscan, agglomerative };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::dbscan: return "dbscan";
    case Algorithm::agglomerative: return "agglomerative";
  }
  return "kmeans";
}

// One grid entry of the clustering sweep.
struct ClusteringSpec {
  Algorithm algorithm = Algorithm::kmeans;
  std::size_t k = 2;                  // kmeans, agglomerative
  double eps = 0.1;                   // dbscan
  std::size_t min_pts = 3;            // dbscan
  Linkage linkage = Linkage::average;  // agglomerative
  DistanceMetric metric = DistanceMetric::cosine_distance;
  std::uint64_t seed = 0;             // kmeans

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(algorithm) << ':';
    switch (algorithm) {
      case Algorithm::kmeans: os << "k=" << k << ",seed=" << seed; break;
      case Algorithm::dbscan: os << "eps=" << eps << ",min_pts=" << min_pts; break;
      case Algorithm::agglomerative: os << "k=" << k << ",linkage=" << to_string(linkage); break;
    }
    os << ",metric=" << to_string(metric);
    return os.str();
  }
};

// Parses "algorithm:key=value,key=value", e.g. "dbscan:eps=0.05,min_pts=3".
inline ClusteringSpec parse_clustering_spec(std::string_view text, std::uint64_t default_seed = 0) {
  ClusteringSpec spec;
  spec.seed = default_seed;
  const auto colon = text.find(':');
  const auto name = std::string(text.substr(0, colon));
  if (name == "kmeans") spec.algorithm = Algorithm::kmeans;
  else if (name == "dbscan") spec.algorithm = Algorithm::dbscan;
  else if (name == "agglomerative") spec.algorithm = Algorithm::agglomerative;
  else throw ConfigError("unknown clustering algorithm '" + name + "'");
  if (colon == std::string_view::npos) return spec;
  std::stringstream rest{std::string(text.substr(colon + 1))};
  std::string kv;
  while (std::getline(rest, kv, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed clustering parameter '" + kv + "'");
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    try {
      if (key == "k") spec.k = std::stoul(val);
      else if (key == "eps") spec.eps = std::stod(val);
      else if (key == "min_pts") spec.min_pts = std::stoul(val);
      else if (key == "linkage") spec.linkage = parse_linkage(val);
      else if (key == "metric") spec.metric = parse_distance_metric(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else throw ConfigError("unknown clustering parameter '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad value for clustering parameter '" + key + "'");
    }
  }
  return spec;
}

// Runs one clustering spec on author vectors. k-means under the cosine metric
// clusters L2-normalized copies (spherical k-means).
inline Assignment run_clustering(const std::vector<Vector>& vectors, const ClusteringSpec& spec) {
  switch (spec.algorithm) {
    case Algorithm::kmeans: {
      KMeansOptions opts;
      opts.seed = spec.seed;
      if (spec.metric == DistanceMetric::cosine_distance) {
        std::vector<Vector> unit;
        unit.reserve(vectors.size());
        for (const auto& v : vectors) unit.push_back(normalized(v));
        return kmeans(unit, spec.k, opts);
      }
      return kmeans(vectors, spec.k, opts);
    }
    case Algorithm::dbscan: return dbscan(vectors, spec.eps, spec.min_pts, spec.metric);
    case Algorithm::agglomerative: return agglomerative(vectors, spec.k, spec.linkage, spec.metric);
  }
  throw ComputeError("unreachable clustering algorithm");
}

struct SweepCandidate {
  ClusteringSpec spec;
  bool skipped = false;
  std::string skip_reason;
  std::size_t k = 0;
  std::size_t noise = 0;
  double dev_eer = 1.0;
  double dev_ap = 0.0;
  std::optional<InterpretableBasis> basis;
};

struct SweepResult {
  std::vector<SweepCandidate> candidates;
  std::size_t selected = 0;
};

// Projects every document referenced by the pairs and scores the pairs by
// cosine between projections.
inline std::vector<double> interpretable_pair_scores(const std::vector<PairExample>& pairs,
                                                     const Corpus& corpus,
                                                     const InterpretableBasis& basis) {
  VectorLookup projected;
  for (const auto& p : pairs) {
    for (const auto* id : {&p.doc_a, &p.doc_b}) {
      if (projected.count(*id)) continue;
      projected.emplace(*id, project(*id, corpus.record(*id).embedding, basis).coords);
    }
  }
  return pair_scores(pairs, projected);
}

inline std::vector<double> latent_pair_scores(const std::vector<PairExample>& pairs,
                                              const Corpus& corpus) {
  VectorLookup vectors;
  for (const auto& p : pairs) {
    vectors.emplace(p.doc_a, corpus.record(p.doc_a).embedding);
    vectors.emplace(p.doc_b, corpus.record(p.doc_b).embedding);
  }
  return pair_scores(pairs, vectors);
}

// Among non-skipped candidates whose AP is within `tolerance` of the best,
// picks the smallest k, then the lowest EER, then the earliest grid entry.
inline std::size_t select_candidate(const SweepResult& sweep, double tolerance) {
  const auto& cs = sweep.candidates;
  double best_ap = -1.0;
  for (const auto& c : cs) {
    if (!c.skipped) best_ap = std::max(best_ap, c.dev_ap);
  }
  if (best_ap < 0.0) throw ComputeError("sweep has no usable candidate");
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& c = cs[i];
    if (c.skipped || c.dev_ap < best_ap - tolerance) continue;
    if (!pick) {
      pick = i;
      continue;
    }
    const auto& p = cs[*pick];
    if (c.k < p.k || (c.k == p.k && c.dev_eer < p.dev_eer)) pick = i;
  }
  return *pick;
}

inline SweepResult sweep_clustering(const std::vector<AuthorEmbedding>& authors,
                                    const std::vector<ClusteringSpec>& grid,
                                    const std::vector<PairExample>& dev_pairs,
                                    const Corpus& corpus,
                                    double tolerance = kDefaultPlateauTolerance,
                                    std::size_t max_threads = 0) {
  if (grid.empty()) throw ComputeError("empty clustering grid");
  if (dev_pairs.empty()) throw ComputeError("no dev pairs to evaluate the sweep");
  const auto vectors = vectors_of(authors);
  const auto labels = labels_of(dev_pairs);

  auto evaluate = [&](const ClusteringSpec& spec) {
    SweepCandidate c;
    c.spec = spec;
    try {
      const auto assignment = run_clustering(vectors, spec);
      c.k = static_cast<std::size_t>(assignment.cluster_count);
      c.noise = assignment.noise_count();
      auto basis = centroids_to_basis(assignment, authors);
      const auto scores = interpretable_pair_scores(dev_pairs, corpus, basis);
      c.dev_eer = eer(scores, labels);
      c.dev_ap = average_precision(scores, labels);
      c.basis = std::move(basis);
    } catch (const Error& e) {
      c.skipped = true;
      c.skip_reason = e.what();
    }
    return c;
  };

  SweepResult result;
  result.candidates.resize(grid.size());
  if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());
  // Candidates are independent; results land in grid order.
  for (std::size_t start = 0; start < grid.size(); start += max_threads) {
    const std::size_t stop = std::min(grid.size(), start + max_threads);
    std::vector<std::future<SweepCandidate>> jobs;
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(std::launch::async, evaluate, std::cref(grid[i])));
    }
    for (std::size_t i = start; i < stop; ++i) result.candidates[i] = jobs[i - start].get();
  }
  const bool any = std::any_of(result.candidates.begin(), result.candidates.end(),
                               [](const auto& c) { return !c.skipped; });
  if (!any) throw ComputeError("every clustering candidate failed");
  result.selected = select_candidate(result, tolerance);
  return result;
}

inline InterpretableBasis select_space(const SweepResult& sweep,
                                       double tolerance = kDefaultPlateauTolerance) {
  return *sweep.candidates[select_candidate(sweep, tolerance)].basis;
}

inline nlohmann::ordered_json sweep_to_json(const SweepResult& sweep) {
  nlohmann::ordered_json j;
  j["selected"] = sweep.selected;
  j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : sweep.candidates) {
    nlohmann::ordered_json jc;
    jc["algorithm"] = std::string(to_string(c.spec.algorithm));
    jc["params"] = c.spec.describe();
    jc["skipped"] = c.skipped;
    if (c.skipped) {
      jc["reason"] = c.skip_reason;
    } else {
      jc["k"] = c.k;
      jc["noise"] = c.noise;
      jc["dev_eer"] = c.dev_eer;
      jc["dev_ap"] = c.dev_ap;
    }
    j["candidates"].push_back(std::move(jc));
  }
  return j;
}

// k authors sampled uniformly without replacement become the centroids.
inline InterpretableBasis random_basis(const std::vector<AuthorEmbedding>& authors, std::size_t k,
                                       std::uint64_t seed) {
  if (k > authors.size()) throw ComputeError("random basis: k exceeds number of authors");
  std::vector<std::size_t> idx(authors.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<RepresentativePoint> points;
  for (std::size_t t = 0; t < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, idx.size() - 1);
    std::swap(idx[t], idx[pick(rng)]);
    const auto& a = authors[idx[t]];
    points.push_back({t, a.vector, {a.author_id}, a.doc_ids});
  }
  return InterpretableBasis(BasisSource::random, std::move(points));
}

struct FeatureExamples {
  std::string feature_id;
  std::vector<std::string> doc_ids;
  std::vector<Vector> vectors;
};

// One point per feature at the mean of its example embeddings.
inline InterpretableBasis predefined_feature_basis(const std::vector<FeatureExamples>& features) {
  if (features.empty()) throw ComputeError("empty feature set");
  std::vector<RepresentativePoint> points;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (f.vectors.empty()) throw ComputeError("feature " + f.feature_id + " has no examples");
    points.push_back({i, mean_of(f.vectors), {f.feature_id}, f.doc_ids});
  }
  return InterpretableBasis(BasisSource::predefined_feature, std::move(points));
}

// Same JSONL schema as corpus embeddings with "feature_id" in place of
// "author_id"; "split" is optional. Features keep file order.
inline std::vector<FeatureExamples> parse_feature_examples(std::istream& in) {
  std::vector<FeatureExamples> out;
  std::unordered_map<std::string, std::size_t> slot;
  std::optional<std::size_t> dim;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    const auto doc = detail::require_string(obj, "doc_id", line);
    const auto feature = detail::require_string(obj, "feature_id", line);
    auto vec = detail::require_vector(obj, "vector", line);
    if (!dim) dim = vec.size();
    if (vec.size() != *dim) throw SchemaError("dimension mismatch on line " + std::to_string(line));
    auto [it, inserted] = slot.emplace(feature, out.size());
    if (inserted) out.push_back({feature, {}, {}});
    out[it->second].doc_ids.push_back(doc);
    out[it->second].vectors.push_back(std::move(vec));
  });
  if (out.empty()) throw SchemaError("empty file");
  return out;
}

}  // namespace stylespace

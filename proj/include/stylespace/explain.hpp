#pragma once
// Document- and pair-level explanations built from the closest representative
// points and their style distributions.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/basis.hpp"
#include "stylespace/distributions.hpp"
#include "stylespace/error.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/metrics.hpp"
#include "stylespace/prompts.hpp"
#include "stylespace/stylegen.hpp"

namespace stylespace {

struct DimensionScore {
  std::size_t point_id = 0;
  double similarity = 0.0;
};

struct FeatureWeight {
  std::size_t feature_id = 0;
  double weight = 0.0;
};

struct Explanation {
  std::vector<std::string> subject;  // one doc id, or two for a pair
  std::vector<DimensionScore> dimensions;
  std::vector<FeatureWeight> features;
  std::optional<std::string> rendered;
};

struct ExplainOptions {
  std::size_t n_dims = 3;
  std::size_t m_feats = 10;
  // Debug aid: use the least similar dimensions instead of the closest.
  bool distractive = false;
};

// Highest coordinates first, lower point index on ties.
inline std::vector<DimensionScore> top_dimensions(const ProjectionVector& p, std::size_t n,
                                                  bool lowest = false) {
  if (n < 1 || n > p.coords.size()) throw ComputeError("top_dimensions: n out of range");
  std::vector<DimensionScore> all;
  for (std::size_t i = 0; i < p.coords.size(); ++i) all.push_back({i, p.coords[i]});
  std::stable_sort(all.begin(), all.end(), [lowest](const auto& a, const auto& b) {
    return lowest ? a.similarity < b.similarity : a.similarity > b.similarity;
  });
  all.resize(n);
  return all;
}

namespace detail {

// Indices of the m most probable features (probability > 0), lower id on ties.
inline std::vector<std::size_t> top_features(const StyleDistribution& d, std::size_t m) {
  std::vector<std::size_t> ids;
  for (std::size_t f = 0; f < d.size(); ++f) {
    if (d[f] > 0.0) ids.push_back(f);
  }
  std::stable_sort(ids.begin(), ids.end(), [&](auto a, auto b) { return d[a] > d[b]; });
  if (ids.size() > m) ids.resize(m);
  return ids;
}

// weight(f) = sum over dimensions of similarity * probability(f); only
// positive totals are kept, sorted by weight with lower feature id on ties.
inline std::vector<FeatureWeight> aggregate(const std::vector<DimensionScore>& dims,
                                            const std::vector<StyleDistribution>& dists, std::size_t m) {
  std::vector<double> weight;
  std::vector<bool> used;
  for (const auto& dim : dims) {
    if (dim.point_id >= dists.size()) {
      throw ComputeError("dimension " + std::to_string(dim.point_id) + " has no style distribution");
    }
    const auto& d = dists[dim.point_id];
    if (weight.empty()) {
      weight.assign(d.size(), 0.0);
      used.assign(d.size(), false);
    }
    for (auto f : top_features(d, m)) {
      weight[f] += dim.similarity * d[f];
      used[f] = true;
    }
  }
  std::vector<FeatureWeight> out;
  for (std::size_t f = 0; f < weight.size(); ++f) {
    if (used[f] && weight[f] > 0.0) out.push_back({f, weight[f]});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  return out;
}

inline void check_distributions(const InterpretableBasis& basis, const std::vector<StyleDistribution>& dists) {
  if (dists.size() != basis.k()) {
    throw ComputeError("every basis point needs a style distribution (" + std::to_string(dists.size()) +
                       " for " + std::to_string(basis.k()) + " points)");
  }
}

}  // namespace detail

inline Explanation explain_document(const std::string& doc_id, std::span<const double> embedding,
                                    const InterpretableBasis& basis,
                                    const std::vector<StyleDistribution>& dists,
                                    const ExplainOptions& opts = {}) {
  detail::check_distributions(basis, dists);
  const auto proj = project(doc_id, embedding, basis);
  Explanation e;
  e.subject = {doc_id};
  e.dimensions = top_dimensions(proj, opts.n_dims, opts.distractive);
  e.features = detail::aggregate(e.dimensions, dists, opts.m_feats);
  return e;
}

// Union of both documents' top dimensions; a dimension shared by both keeps
// the larger similarity.
inline Explanation explain_pair(const std::string& doc_a, std::span<const double> emb_a,
                                const std::string& doc_b, std::span<const double> emb_b,
                                const InterpretableBasis& basis,
                                const std::vector<StyleDistribution>& dists,
                                const ExplainOptions& opts = {}) {
  detail::check_distributions(basis, dists);
  const auto top_a = top_dimensions(project(doc_a, emb_a, basis), opts.n_dims, opts.distractive);
  const auto top_b = top_dimensions(project(doc_b, emb_b, basis), opts.n_dims, opts.distractive);
  std::vector<DimensionScore> merged = top_a;
  for (const auto& d : top_b) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.point_id == d.point_id; });
    if (it == merged.end()) merged.push_back(d);
    else it->similarity = std::max(it->similarity, d.similarity);
  }
  std::sort(merged.begin(), merged.end(), [&](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) {
      return opts.distractive ? a.similarity < b.similarity : a.similarity > b.similarity;
    }
    return a.point_id < b.point_id;
  });
  Explanation e;
  e.subject = {doc_a, doc_b};
  e.dimensions = std::move(merged);
  e.features = detail::aggregate(e.dimensions, dists, opts.m_feats);
  return e;
}

inline std::vector<std::string> feature_names(const Explanation& e, const FeatureCatalog& catalog) {
  std::vector<std::string> names;
  for (const auto& f : e.features) names.push_back(catalog.features.at(f.feature_id).canonical);
  return names;
}

// Without a client: "This document's style features: f1; f2." With a client
// the rephrasing prompt goes through it, so replay mode needs a cached entry.
inline std::string render_explanation(const Explanation& e, const FeatureCatalog& catalog,
                                      LlmClient* client = nullptr,
                                      const PromptTemplate& tmpl = rephrase_template(),
                                      double temperature = 0.0) {
  if (e.features.empty()) throw ComputeError("cannot render an explanation without features");
  const auto names = feature_names(e, catalog);
  if (!client) {
    std::string out = "This document's style features: ";
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "; " : "") + names[i];
    return out + ".";
  }
  if (tmpl.kind() != PromptKind::rephrase) throw ConfigError("expected a rephrase template");
  std::string listing;
  for (const auto& n : names) listing += "- " + n + "\n";
  return client->complete(tmpl.fill(listing), temperature);
}

inline nlohmann::ordered_json explanation_to_json(const Explanation& e, const InterpretableBasis& basis,
                                                  const FeatureCatalog& catalog) {
  nlohmann::ordered_json j;
  if (e.subject.size() == 1) j["subject"] = e.subject.front();
  else j["subject"] = e.subject;
  j["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& d : e.dimensions) {
    j["dimensions"].push_back(nlohmann::ordered_json::array({basis[d.point_id].point_id, d.similarity}));
  }
  j["features"] = nlohmann::ordered_json::array();
  for (const auto& f : e.features) {
    j["features"].push_back(
        nlohmann::ordered_json::array({f.feature_id, f.weight, catalog.features.at(f.feature_id).canonical}));
  }
  j["rendered"] = e.rendered ? nlohmann::ordered_json(*e.rendered) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace stylespace

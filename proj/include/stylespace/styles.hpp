#pragma once
// Attaches style distributions to representative points and authors, and
// runs the repeated-prompting stability experiment.

#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/basis.hpp"
#include "stylespace/distributions.hpp"
#include "stylespace/error.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/prompts.hpp"
#include "stylespace/stylegen.hpp"

namespace stylespace {

// Document frequency of each feature within the given documents.
inline FeatureCounts count_features(const FeatureCatalog& catalog,
                                    const std::vector<std::string>& doc_ids, CountScope scope) {
  FeatureCounts c{std::vector<std::size_t>(catalog.size(), 0), scope};
  for (const auto& d : doc_ids) {
    auto it = catalog.doc_features.find(d);
    if (it == catalog.doc_features.end()) continue;
    for (auto f : it->second) ++c.counts[f];
  }
  return c;
}

inline FeatureCounts corpus_counts(const FeatureCatalog& catalog) {
  FeatureCounts c{std::vector<std::size_t>(catalog.size(), 0), CountScope::corpus};
  for (const auto& f : catalog.features) c.counts[f.feature_id] = f.corpus_count;
  return c;
}

inline StyleDistribution distribution_for_docs(const FeatureCatalog& catalog,
                                               const std::vector<std::string>& doc_ids) {
  return assign_distribution(count_features(catalog, doc_ids, CountScope::cluster),
                             corpus_counts(catalog));
}

// One distribution per basis point, in basis order.
inline std::vector<StyleDistribution> point_distributions(const InterpretableBasis& basis,
                                                          const FeatureCatalog& catalog) {
  std::vector<StyleDistribution> out;
  out.reserve(basis.k());
  for (const auto& p : basis.points()) {
    try {
      out.push_back(distribution_for_docs(catalog, p.member_docs));
    } catch (const ComputeError& e) {
      throw ComputeError("point " + std::to_string(p.point_id) + ": " + e.what());
    }
  }
  return out;
}

inline nlohmann::ordered_json point_distributions_to_json(const InterpretableBasis& basis,
                                                          const std::vector<StyleDistribution>& dists) {
  nlohmann::ordered_json j;
  j["catalog_size"] = dists.empty() ? 0 : dists.front().size();
  j["points"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    nlohmann::ordered_json jp;
    jp["point_id"] = basis[i].point_id;
    jp["probs"] = distribution_to_json(dists[i]);
    j["points"].push_back(std::move(jp));
  }
  return j;
}

inline std::vector<StyleDistribution> point_distributions_from_json(const nlohmann::json& j) {
  std::vector<StyleDistribution> out;
  try {
    const auto size = j.at("catalog_size").get<std::size_t>();
    for (const auto& jp : j.at("points")) out.push_back(distribution_from_json(jp.at("probs"), size));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema violation in distributions file: ") + e.what());
  }
  return out;
}

struct StabilityOptions {
  std::size_t rounds = 25;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  double match_threshold = kDefaultMergeThreshold;
  double kl_eps = kDefaultKlEps;
  // When set, each round's descriptions are shortened before matching, so the
  // round sees the same refinement as the catalog.
  std::optional<PromptTemplate> shortening;
};

struct StabilityResult {
  StabilityTrace mean;  // pointwise mean with stddev across repeats
  std::vector<StabilityTrace> runs;
};

struct AuthorDocument {
  std::string doc_id;
  std::string text;
};

inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repeat)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Style distribution for a single prompting round over all the author's
// documents, pooling feature occurrences across documents.
inline StyleDistribution round_distribution(LlmClient& generator, LlmClient* shortener,
                                            const std::vector<AuthorDocument>& docs,
                                            const PromptTemplate& variant, const CatalogMatcher& matcher,
                                            std::size_t catalog_size, const StabilityOptions& opts) {
  FeatureCounts counts{std::vector<std::size_t>(catalog_size, 0), CountScope::round};
  for (const auto& d : docs) {
    const auto response = generator.complete(variant.fill(d.text), opts.temperature);
    const auto groups = parse_style_response(d.doc_id, response);
    std::vector<std::string> descriptions;
    if (opts.shortening && shortener) {
      std::vector<const RawStyleDescription*> ptrs;
      for (const auto& g : groups) ptrs.push_back(&g);
      const auto listing = format_for_shortening(ptrs);
      if (listing.empty()) continue;
      descriptions = split_phrases(shortener->complete(opts.shortening->fill(listing), opts.temperature));
    } else {
      for (const auto& g : groups) {
        if (g.level) descriptions.insert(descriptions.end(), g.sentences.begin(), g.sentences.end());
      }
    }
    for (const auto& s : descriptions) {
      if (auto f = matcher.match(s)) ++counts.counts[*f];
    }
  }
  if (counts.total() == 0) throw ComputeError("empty feature mapping in stability round");
  return StyleDistribution::from_counts(counts);
}

// Repeats run in parallel with per-repeat seeds; the variant for each round is
// drawn uniformly from the pool.
inline StabilityResult run_stability_experiment(LlmClient& generator, LlmClient* shortener,
                                                const std::vector<AuthorDocument>& docs,
                                                const std::vector<PromptTemplate>& pool,
                                                const FeatureCatalog& catalog,
                                                const SimilarityProvider& provider,
                                                const StabilityOptions& opts = {}) {
  if (opts.rounds < 2) throw ComputeError("stability needs at least 2 rounds");
  if (opts.repeats < 1) throw ComputeError("stability needs at least 1 repeat");
  if (docs.empty()) throw ComputeError("no documents for the stability experiment");
  if (catalog.size() == 0) throw ComputeError("empty catalog");
  const CatalogMatcher matcher(catalog, provider, opts.match_threshold);

  auto one_repeat = [&](std::size_t r) {
    VariantSampler sampler(pool, repeat_seed(opts.seed, r));
    std::vector<StyleDistribution> rounds;
    for (std::size_t t = 0; t < opts.rounds; ++t) {
      rounds.push_back(round_distribution(generator, shortener, docs, sampler.sample(), matcher,
                                          catalog.size(), opts));
    }
    return stability_trace(rounds, opts.kl_eps);
  };

  StabilityResult result;
  std::vector<std::future<StabilityTrace>> jobs;
  for (std::size_t r = 0; r < opts.repeats; ++r) jobs.push_back(std::async(std::launch::async, one_repeat, r));
  for (auto& j : jobs) result.runs.push_back(j.get());
  result.mean = aggregate_traces(result.runs);
  return result;
}

}  // namespace stylespace

#pragma once
// Style description generation and refinement into a feature catalog:
// generate -> shorten -> merge similar descriptions -> extract key phrases.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/corpus.hpp"
#include "stylespace/error.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/prompts.hpp"

namespace stylespace {

inline constexpr double kDefaultMergeThreshold = 0.8;

enum class StyleLevel { morphological, syntactic, semantic, discourse };

inline std::string_view to_string(StyleLevel l) {
  switch (l) {
    case StyleLevel::morphological: return "morphological";
    case StyleLevel::syntactic: return "syntactic";
    case StyleLevel::semantic: return "semantic";
    case StyleLevel::discourse: return "discourse";
  }
  return "morphological";
}

struct RawStyleDescription {
  std::string doc_id;
  std::optional<StyleLevel> level;  // empty for text outside any heading
  std::vector<std::string> sentences;
  std::vector<bool> conforming;  // parallel to sentences

  bool parse_warning() const {
    return !level || std::find(conforming.begin(), conforming.end(), false) != conforming.end();
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Drops list markers and markdown emphasis around a line.
inline std::string strip_markup(std::string_view line) {
  std::string s = trim(line);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (s[0] == '#' || s[0] == '*' || s[0] == '-' || s[0] == '+') {
      s = trim(std::string_view(s).substr(1));
      changed = true;
    } else if (s.rfind("\xE2\x80\xA2", 0) == 0) {  // bullet
      s = trim(std::string_view(s).substr(3));
      changed = true;
    } else if (std::isdigit(static_cast<unsigned char>(s[0]))) {
      std::size_t i = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '.' || s[i] == ')') && i + 1 < s.size() && s[i + 1] == ' ') {
        s = trim(std::string_view(s).substr(i + 1));
        changed = true;
      }
    }
  }
  while (s.size() >= 2 && s.compare(s.size() - 2, 2, "**") == 0) s = trim(s.substr(0, s.size() - 2));
  return s;
}

inline std::optional<StyleLevel> heading_level(std::string_view line) {
  const auto l = lower(line);
  if (l.rfind("the author", 0) == 0 || l.size() > 60) return std::nullopt;
  if (l.find("morpholog") != std::string::npos) return StyleLevel::morphological;
  if (l.find("syntac") != std::string::npos) return StyleLevel::syntactic;
  if (l.find("semantic") != std::string::npos) return StyleLevel::semantic;
  if (l.find("discourse") != std::string::npos) return StyleLevel::discourse;
  return std::nullopt;
}

}  // namespace detail

// Splits free text into sentence-like phrases on '.', ';', '!', '?' and line
// breaks. Trailing periods are kept on each phrase.
inline std::vector<std::string> split_phrases(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&](bool keep_period) {
    auto s = detail::strip_markup(cur);
    if (!s.empty()) {
      if (keep_period) s.push_back('.');
      out.push_back(std::move(s));
    }
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool at_break = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if ((c == '.' || c == '!' || c == '?') && at_break) {
      flush(true);
    } else if (c == ';' || c == '\n') {
      flush(false);
    } else {
      cur.push_back(c);
    }
  }
  flush(false);
  return out;
}

inline bool is_conforming(std::string_view sentence) {
  static const std::regex pattern(R"(^The author (is|uses) .+\.$)");
  return std::regex_match(sentence.begin(), sentence.end(), pattern);
}

// Parses one generation response into per-level descriptions. Lines before
// the first heading form a level-less group; headings may carry text after
// a colon.
inline std::vector<RawStyleDescription> parse_style_response(const std::string& doc_id,
                                                             std::string_view response) {
  std::vector<RawStyleDescription> out;
  auto group_for = [&](std::optional<StyleLevel> level) -> RawStyleDescription& {
    for (auto& g : out) {
      if (g.level == level) return g;
    }
    out.push_back({doc_id, level, {}, {}});
    return out.back();
  };
  std::optional<StyleLevel> current;
  std::size_t start = 0;
  while (start <= response.size()) {
    auto end = response.find('\n', start);
    if (end == std::string_view::npos) end = response.size();
    auto line = detail::strip_markup(response.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    std::string rest = line;
    const auto colon = line.find(':');
    const auto head = detail::heading_level(colon == std::string::npos ? line : line.substr(0, colon));
    if (head) {
      current = head;
      rest = colon == std::string::npos ? "" : detail::trim(std::string_view(line).substr(colon + 1));
      group_for(current);
    }
    for (auto& s : split_phrases(rest)) {
      auto& g = group_for(current);
      g.conforming.push_back(is_conforming(s));
      g.sentences.push_back(std::move(s));
    }
  }
  std::erase_if(out, [](const auto& g) { return g.sentences.empty(); });
  return out;
}

struct GenerationOptions {
  std::optional<Split> split;  // restrict to one split; all documents otherwise
  double temperature = 0.0;
  std::size_t max_in_flight = 4;
};

// One generation prompt per document; responses parsed into level groups.
inline std::vector<RawStyleDescription> generate_descriptions(LlmClient& client, const Corpus& corpus,
                                                              const PromptTemplate& tmpl,
                                                              const GenerationOptions& opts = {}) {
  if (tmpl.kind() != PromptKind::generation) throw ConfigError("expected a generation template");
  std::vector<const DocumentRecord*> docs;
  std::vector<std::string> prompts;
  for (const auto& r : corpus.records()) {
    if (opts.split && r.split != *opts.split) continue;
    if (!r.text) throw InputError("document " + r.doc_id + " has no text");
    docs.push_back(&r);
    prompts.push_back(tmpl.fill(*r.text));
  }
  const auto responses = complete_all(client, prompts, opts.temperature, opts.max_in_flight);
  std::vector<RawStyleDescription> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto parsed = parse_style_response(docs[i]->doc_id, responses[i]);
    if (parsed.empty()) {
      // Keep an explicit empty, flagged record so the document is accounted for.
      parsed.push_back({docs[i]->doc_id, std::nullopt, {}, {}});
    }
    for (auto& d : parsed) out.push_back(std::move(d));
  }
  return out;
}

struct ShortenedDescription {
  std::string doc_id;
  std::string text;
};

// Bullet list of one document's leveled sentences, as sent to the shortening prompt.
inline std::string format_for_shortening(const std::vector<const RawStyleDescription*>& groups) {
  std::string out;
  for (const auto* g : groups) {
    if (!g->level) continue;
    for (const auto& s : g->sentences) out += "- " + s + "\n";
  }
  return out;
}

// One shortening request per document, grouping descriptions by doc_id in
// first-appearance order.
inline std::vector<ShortenedDescription> shorten_descriptions(LlmClient& client,
                                                              const std::vector<RawStyleDescription>& raw,
                                                              const PromptTemplate& tmpl,
                                                              double temperature = 0.0,
                                                              std::size_t max_in_flight = 4) {
  if (tmpl.kind() != PromptKind::shortening) throw ConfigError("expected a shortening template");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const RawStyleDescription*>> by_doc;
  for (const auto& d : raw) {
    auto [it, inserted] = by_doc.try_emplace(d.doc_id);
    if (inserted) order.push_back(d.doc_id);
    it->second.push_back(&d);
  }
  std::vector<std::string> docs, prompts;
  for (const auto& id : order) {
    auto listing = format_for_shortening(by_doc[id]);
    if (listing.empty()) continue;
    docs.push_back(id);
    prompts.push_back(tmpl.fill(listing));
  }
  if (prompts.empty()) throw ComputeError("nothing to shorten");
  const auto responses = complete_all(client, prompts, temperature, max_in_flight);
  std::vector<ShortenedDescription> out;
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({docs[i], responses[i]});
  return out;
}

class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  // Symmetric, deterministic, in [0, 1].
  virtual double score(std::string_view a, std::string_view b) const = 0;
};

// Jaccard index over lowercased alphabetic token sets. Two strings without
// tokens score 1 when equal and 0 otherwise.
class LexicalJaccard : public SimilarityProvider {
 public:
  static std::set<std::string> tokens(std::string_view s) {
    std::set<std::string> out;
    std::string cur;
    for (char c : s) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      } else if (!cur.empty()) {
        out.insert(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) out.insert(std::move(cur));
    return out;
  }

  double score(std::string_view a, std::string_view b) const override {
    const auto ta = tokens(a), tb = tokens(b);
    if (ta.empty() && tb.empty()) return a == b ? 1.0 : 0.0;
    std::size_t inter = 0;
    for (const auto& t : ta) inter += tb.count(t);
    const std::size_t uni = ta.size() + tb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
  }
};

struct MergedGroup {
  std::string canonical;                    // shortest member, then lexicographic
  std::vector<std::string> members;         // distinct strings, first-appearance order
  std::vector<std::size_t> input_indices;  // positions in the merge input
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root survives, so roots are stable under input order.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

// Connected components of the graph linking descriptions whose similarity
// reaches the threshold. Groups are ordered by their first input position.
inline std::vector<MergedGroup> merge_features(const std::vector<std::string>& descriptions,
                                               const SimilarityProvider& provider,
                                               double threshold = kDefaultMergeThreshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ComputeError("merge threshold must be in (0, 1]");
  std::vector<std::string> uniq;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::size_t> slot_of(descriptions.size());
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    auto [it, inserted] = slot.emplace(descriptions[i], uniq.size());
    if (inserted) uniq.push_back(descriptions[i]);
    slot_of[i] = it->second;
  }
  detail::DisjointSets sets(uniq.size());
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    for (std::size_t j = i + 1; j < uniq.size(); ++j) {
      if (provider.score(uniq[i], uniq[j]) >= threshold) sets.unite(i, j);
    }
  }
  std::vector<MergedGroup> groups;
  std::unordered_map<std::size_t, std::size_t> group_of_root;
  std::vector<bool> member_added(uniq.size(), false);
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    const auto s = slot_of[i];
    const auto root = sets.find(s);
    auto [it, inserted] = group_of_root.emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    auto& g = groups[it->second];
    g.input_indices.push_back(i);
    if (!member_added[s]) {
      member_added[s] = true;
      g.members.push_back(uniq[s]);
    }
  }
  for (auto& g : groups) {
    g.canonical = *std::min_element(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
  }
  return groups;
}

// "The author uses vivid imagery." -> "vivid imagery"
inline std::string extract_key_phrase(std::string_view description) {
  std::string s = detail::trim(description);
  for (std::string_view prefix : {"The author is ", "The author uses "}) {
    if (s.rfind(prefix, 0) == 0) {
      s.erase(0, prefix.size());
      break;
    }
  }
  while (!s.empty() && s.back() == '.') s.pop_back();
  return detail::lower(detail::trim(s));
}

struct StyleFeature {
  std::size_t feature_id = 0;
  std::string canonical;
  std::vector<std::string> aliases;
  std::size_t corpus_count = 0;
};

struct FeatureCatalog {
  std::vector<StyleFeature> features;
  std::map<std::string, std::vector<std::size_t>> doc_features;  // sorted ids per doc

  std::size_t size() const noexcept { return features.size(); }
};

// Builds the catalog from merged groups. Groups whose key phrases coincide are
// folded into one feature. When origins are given (doc id per merge input),
// corpus_count is the number of documents containing the feature; otherwise
// it counts input occurrences.
inline FeatureCatalog extract_key_phrases(const std::vector<MergedGroup>& groups,
                                          const std::vector<std::string>* origins = nullptr) {
  if (groups.empty()) throw ComputeError("no groups to build a catalog from");
  FeatureCatalog cat;
  std::unordered_map<std::string, std::size_t> by_phrase;
  std::vector<std::set<std::string>> docs_per_feature;
  std::vector<std::size_t> occurrences;
  for (const auto& g : groups) {
    auto phrase = extract_key_phrase(g.canonical);
    if (phrase.empty()) phrase = detail::lower(detail::trim(g.canonical));
    auto [it, inserted] = by_phrase.emplace(phrase, cat.features.size());
    if (inserted) {
      cat.features.push_back({cat.features.size(), phrase, {}, 0});
      docs_per_feature.emplace_back();
      occurrences.push_back(0);
    }
    const auto f = it->second;
    auto& aliases = cat.features[f].aliases;
    for (const auto& m : g.members) {
      if (std::find(aliases.begin(), aliases.end(), m) == aliases.end()) aliases.push_back(m);
    }
    occurrences[f] += g.input_indices.size();
    if (origins) {
      for (auto i : g.input_indices) docs_per_feature[f].insert((*origins).at(i));
    }
  }
  for (std::size_t f = 0; f < cat.features.size(); ++f) {
    cat.features[f].corpus_count = origins ? docs_per_feature[f].size() : occurrences[f];
    for (const auto& d : docs_per_feature[f]) cat.doc_features[d].push_back(f);
  }
  for (auto& [doc, ids] : cat.doc_features) std::sort(ids.begin(), ids.end());
  return cat;
}

struct SourcedDescription {
  std::string doc_id;
  std::string text;
};

// Splits shortened paragraphs into individual descriptions tagged with their document.
inline std::vector<SourcedDescription> explode(const std::vector<ShortenedDescription>& shortened) {
  std::vector<SourcedDescription> out;
  for (const auto& s : shortened) {
    for (auto& p : split_phrases(s.text)) out.push_back({s.doc_id, std::move(p)});
  }
  return out;
}

inline FeatureCatalog build_catalog(const std::vector<SourcedDescription>& descriptions,
                                    const SimilarityProvider& provider,
                                    double threshold = kDefaultMergeThreshold) {
  std::vector<std::string> texts, origins;
  for (const auto& d : descriptions) {
    texts.push_back(d.text);
    origins.push_back(d.doc_id);
  }
  return extract_key_phrases(merge_features(texts, provider, threshold), &origins);
}

struct OverlapReport {
  double a_in_b = 0.0;  // fraction of A's features matched in B
  double b_in_a = 0.0;
};

inline OverlapReport feature_overlap(const FeatureCatalog& a, const FeatureCatalog& b,
                                     const SimilarityProvider& provider,
                                     double threshold = kDefaultMergeThreshold) {
  if (a.features.empty() || b.features.empty()) throw ComputeError("feature overlap needs non-empty catalogs");
  auto fraction = [&](const FeatureCatalog& x, const FeatureCatalog& y) {
    std::size_t hit = 0;
    for (const auto& fx : x.features) {
      for (const auto& fy : y.features) {
        if (provider.score(fx.canonical, fy.canonical) >= threshold) {
          ++hit;
          break;
        }
      }
    }
    return static_cast<double>(hit) / static_cast<double>(x.features.size());
  };
  return {fraction(a, b), fraction(b, a)};
}

// Maps description strings onto catalog features: an exact key-phrase match
// against a feature's canonical phrase or aliases wins; otherwise the alias
// whose key phrase scores highest at or above the threshold (lowest feature
// id on ties).
class CatalogMatcher {
 public:
  CatalogMatcher(const FeatureCatalog& catalog, const SimilarityProvider& provider,
                 double threshold = kDefaultMergeThreshold)
      : catalog_(catalog), provider_(provider), threshold_(threshold) {
    for (const auto& f : catalog.features) {
      exact_.emplace(f.canonical, f.feature_id);
      auto& phrases = alias_phrases_.emplace_back();
      for (const auto& a : f.aliases) {
        phrases.push_back(extract_key_phrase(a));
        exact_.emplace(phrases.back(), f.feature_id);
      }
    }
  }

  std::optional<std::size_t> match(std::string_view description) const {
    const auto phrase = extract_key_phrase(description);
    if (auto it = exact_.find(phrase); it != exact_.end()) return it->second;
    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (std::size_t f = 0; f < catalog_.features.size(); ++f) {
      for (const auto& a : alias_phrases_[f]) {
        const double s = provider_.score(phrase, a);
        if (s >= threshold_ && s > best_score) {
          best = catalog_.features[f].feature_id;
          best_score = s;
        }
      }
    }
    return best;
  }

 private:
  const FeatureCatalog& catalog_;
  const SimilarityProvider& provider_;
  double threshold_;
  std::unordered_map<std::string, std::size_t> exact_;
  std::vector<std::vector<std::string>> alias_phrases_;
};

inline nlohmann::ordered_json catalog_to_json(const FeatureCatalog& cat) {
  nlohmann::ordered_json j;
  j["features"] = nlohmann::ordered_json::array();
  for (const auto& f : cat.features) {
    nlohmann::ordered_json jf;
    jf["feature_id"] = f.feature_id;
    jf["canonical"] = f.canonical;
    jf["aliases"] = f.aliases;
    jf["corpus_count"] = f.corpus_count;
    j["features"].push_back(std::move(jf));
  }
  j["doc_features"] = nlohmann::ordered_json::object();
  for (const auto& [doc, ids] : cat.doc_features) j["doc_features"][doc] = ids;
  return j;
}

inline FeatureCatalog catalog_from_json(const nlohmann::json& j) {
  FeatureCatalog cat;
  try {
    for (const auto& jf : j.at("features")) {
      StyleFeature f;
      f.feature_id = jf.at("feature_id").get<std::size_t>();
      f.canonical = jf.at("canonical").get<std::string>();
      f.aliases = jf.value("aliases", std::vector<std::string>{});
      f.corpus_count = jf.value("corpus_count", std::size_t{1});
      if (f.feature_id != cat.features.size()) throw SchemaError("catalog feature ids must be dense 0..K-1");
      if (f.canonical.empty()) throw SchemaError("empty canonical phrase in catalog");
      cat.features.push_back(std::move(f));
    }
    if (j.contains("doc_features")) {
      for (const auto& [doc, ids] : j.at("doc_features").items()) {
        auto v = ids.get<std::vector<std::size_t>>();
        for (auto id : v) {
          if (id >= cat.features.size()) throw SchemaError("doc_features references unknown feature id");
        }
        cat.doc_features[doc] = std::move(v);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema violation in catalog: ") + e.what());
  }
  return cat;
}

}  // namespace stylespace

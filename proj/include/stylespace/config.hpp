#pragma once
// Pipeline configuration: a sectioned key-value file ("[section]" headers,
// "key = value" lines, '#' or ';' comments) flattened to "section.key", with
// command-line overrides applied on top.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/error.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/space.hpp"
#include "stylespace/stylegen.hpp"

namespace stylespace {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = detail::trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    auto key = detail::trim(std::string_view(s).substr(0, eq));
    auto value = detail::trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

struct PipelineConfig {
  // paths
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> documents;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> basis;     // precomputed basis; skips the sweep
  std::optional<std::filesystem::path> topics;    // per-document topic vectors
  std::optional<std::filesystem::path> features;  // predefined-feature examples

  // clustering
  std::vector<ClusteringSpec> grid;
  bool normalize = false;

  // thresholds
  double merge_threshold = kDefaultMergeThreshold;
  double plateau_tolerance = kDefaultPlateauTolerance;
  double kl_eps = kDefaultKlEps;

  std::uint64_t seed = 0;
  double neg_ratio = 1.0;
  std::size_t n_dims = 3;
  std::size_t m_feats = 10;
  Split eval_split = Split::test;
  std::size_t random_seeds = 10;

  // llm
  ClientMode mode = ClientMode::replay;
  std::string generation_model = "llama3-8b";
  std::string shortening_model = "gpt-3.5-turbo";
  std::string rephrase_model = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::size_t max_in_flight = 4;
  bool rephrase = false;

  // stability
  std::optional<std::string> stability_author;
  std::size_t rounds = 25;
  std::size_t repeats = 10;
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

// Relative paths resolve against base_dir (the config file's directory).
inline PipelineConfig config_from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir = {}) {
  PipelineConfig c;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  std::optional<std::string> grid_text;
  std::optional<DistanceMetric> metric;
  for (const auto& [key, v] : kv) {
    if (key == "paths.embeddings") c.embeddings = path(v);
    else if (key == "paths.documents") c.documents = path(v);
    else if (key == "paths.cache_dir") c.cache_dir = path(v);
    else if (key == "paths.output_dir") c.output_dir = path(v);
    else if (key == "paths.basis") c.basis = path(v);
    else if (key == "paths.topics") c.topics = path(v);
    else if (key == "paths.features") c.features = path(v);
    else if (key == "clustering.grid") grid_text = v;
    else if (key == "clustering.metric") metric = parse_distance_metric(v);
    else if (key == "clustering.normalize") c.normalize = detail::to_bool(key, v);
    else if (key == "thresholds.merge") c.merge_threshold = detail::to_double(key, v);
    else if (key == "thresholds.plateau_tolerance") c.plateau_tolerance = detail::to_double(key, v);
    else if (key == "thresholds.kl_eps") c.kl_eps = detail::to_double(key, v);
    else if (key == "seeds.seed") c.seed = detail::to_uint(key, v);
    else if (key == "pairs.neg_ratio") c.neg_ratio = detail::to_double(key, v);
    else if (key == "explain.n_dims") c.n_dims = detail::to_uint(key, v);
    else if (key == "explain.m_feats") c.m_feats = detail::to_uint(key, v);
    else if (key == "explain.rephrase") c.rephrase = detail::to_bool(key, v);
    else if (key == "evaluate.split") {
      auto s = parse_split(v);
      if (!s) throw ConfigError("unknown split '" + v + "'");
      c.eval_split = *s;
    } else if (key == "evaluate.random_seeds") c.random_seeds = detail::to_uint(key, v);
    else if (key == "llm.mode") {
      if (v == "live") c.mode = ClientMode::live;
      else if (v == "replay") c.mode = ClientMode::replay;
      else throw ConfigError("llm.mode must be live or replay");
    } else if (key == "llm.generation_model") c.generation_model = v;
    else if (key == "llm.shortening_model") c.shortening_model = v;
    else if (key == "llm.rephrase_model") c.rephrase_model = v;
    else if (key == "llm.temperature") c.temperature = detail::to_double(key, v);
    else if (key == "llm.max_in_flight") c.max_in_flight = detail::to_uint(key, v);
    else if (key == "stability.author") c.stability_author = v;
    else if (key == "stability.rounds") c.rounds = detail::to_uint(key, v);
    else if (key == "stability.repeats") c.repeats = detail::to_uint(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (grid_text) {
    std::stringstream ss(*grid_text);
    std::string item;
    while (std::getline(ss, item, ';')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      c.grid.push_back(parse_clustering_spec(item, c.seed));
    }
  }
  if (metric) {
    for (auto& g : c.grid) {
      if (grid_text->find("metric=") == std::string::npos) g.metric = *metric;
    }
  }
  return c;
}

inline KeyValues load_key_values(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_key_values(in);
}

// Checks ranges and the existence of inputs without touching any outputs.
inline void validate(const PipelineConfig& c) {
  if (!(c.merge_threshold > 0.0 && c.merge_threshold <= 1.0)) throw ConfigError("thresholds.merge must be in (0, 1]");
  if (!(c.plateau_tolerance >= 0.0 && c.plateau_tolerance <= 1.0)) {
    throw ConfigError("thresholds.plateau_tolerance must be in [0, 1]");
  }
  if (!(c.kl_eps > 0.0 && c.kl_eps < 1.0)) throw ConfigError("thresholds.kl_eps must be in (0, 1)");
  if (!(c.neg_ratio > 0.0)) throw ConfigError("pairs.neg_ratio must be positive");
  if (c.n_dims < 1 || c.m_feats < 1) throw ConfigError("explain.n_dims and explain.m_feats must be at least 1");
  if (c.temperature < 0.0 || c.temperature > 2.0) throw ConfigError("llm.temperature must be in [0, 2]");
  if (c.max_in_flight < 1) throw ConfigError("llm.max_in_flight must be at least 1");
  if (c.rounds < 2) throw ConfigError("stability.rounds must be at least 2");
  if (c.repeats < 1) throw ConfigError("stability.repeats must be at least 1");
  if (c.output_dir.empty()) throw ConfigError("paths.output_dir is required");
}

inline void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " path is not configured");
  if (!std::filesystem::is_regular_file(p)) throw InputError(what + " not found: " + p.string());
}

}  // namespace stylespace

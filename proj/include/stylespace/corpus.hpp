#pragma once
// Author-labeled documents with precomputed embeddings, plus verification
// pair construction.
//
// Embeddings file (JSONL, one object per line):
//   {"doc_id": str, "author_id": str, "split": "train"|"dev"|"test", "vector": [float, ...]}
// Documents file (JSONL):
//   {"doc_id": str, "text": str}

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/error.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace {

enum class Split { train, dev, test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  return std::nullopt;
}

struct DocumentRecord {
  std::string doc_id;
  std::string author_id;
  Split split = Split::train;
  Vector embedding;
  std::optional<std::string> text;
};

class Corpus {
 public:
  Corpus() = default;

  // Validates the records and builds the author index. Throws SchemaError on
  // duplicate ids or inconsistent dimensions.
  explicit Corpus(std::vector<DocumentRecord> records) : records_(std::move(records)) {
    if (records_.empty()) throw SchemaError("empty corpus");
    dim_ = records_.front().embedding.size();
    if (dim_ == 0) throw SchemaError("schema violation: empty vector");
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.embedding.size() != dim_) {
        throw SchemaError("dimension mismatch: doc " + r.doc_id + " has " +
                          std::to_string(r.embedding.size()) + ", expected " +
                          std::to_string(dim_));
      }
      if (!doc_index_.emplace(r.doc_id, i).second) {
        throw SchemaError("duplicate doc_id: " + r.doc_id);
      }
      auto [it, inserted] = author_slot_.emplace(r.author_id, authors_.size());
      if (inserted) {
        authors_.push_back(r.author_id);
        author_docs_.emplace_back();
      }
      author_docs_[it->second].push_back(i);
    }
  }

  const std::vector<DocumentRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  // Authors in order of first appearance.
  const std::vector<std::string>& authors() const noexcept { return authors_; }

  const DocumentRecord& record(std::string_view doc_id) const {
    return records_[index_of(doc_id)];
  }

  bool contains(std::string_view doc_id) const {
    return doc_index_.find(std::string(doc_id)) != doc_index_.end();
  }

  std::size_t index_of(std::string_view doc_id) const {
    auto it = doc_index_.find(std::string(doc_id));
    if (it == doc_index_.end()) throw InputError("unknown doc_id: " + std::string(doc_id));
    return it->second;
  }

  // Record indices for one author, in corpus order.
  const std::vector<std::size_t>& docs_of(std::string_view author_id) const {
    auto it = author_slot_.find(std::string(author_id));
    if (it == author_slot_.end()) {
      throw InputError("unknown author_id: " + std::string(author_id));
    }
    return author_docs_[it->second];
  }

  std::vector<std::size_t> indices_in(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (records_[i].split == split) out.push_back(i);
    }
    return out;
  }

 private:
  std::vector<DocumentRecord> records_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::unordered_map<std::string, std::size_t> author_slot_;
  std::vector<std::string> authors_;
  std::vector<std::vector<std::size_t>> author_docs_;
};

struct PairExample {
  std::string doc_a;
  std::string doc_b;
  bool label = false;  // same author

  friend bool operator==(const PairExample&, const PairExample&) = default;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError("schema violation: line " + std::to_string(line) + ": missing '" +
                      key + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  std::size_t line) {
  const auto& v = require_field(obj, key, line);
  if (!v.is_string()) {
    throw SchemaError("schema violation: line " + std::to_string(line) + ": '" + key +
                      "' must be a string");
  }
  return v.get<std::string>();
}

inline Vector require_vector(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require_field(obj, key, line);
  if (!v.is_array()) {
    throw SchemaError("schema violation: line " + std::to_string(line) + ": '" + key +
                      "' must be an array");
  }
  Vector out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw SchemaError("schema violation: line " + std::to_string(line) +
                        ": non-numeric vector entry");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

// Calls fn(json_object, line_number) for every non-blank line.
template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("schema violation: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw SchemaError("schema violation: line " + std::to_string(line_no) +
                        ": expected a JSON object");
    }
    fn(obj, line_no);
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace detail

inline std::vector<DocumentRecord> parse_embeddings_jsonl(std::istream& in) {
  std::vector<DocumentRecord> records;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    DocumentRecord r;
    r.doc_id = detail::require_string(obj, "doc_id", line);
    r.author_id = detail::require_string(obj, "author_id", line);
    const auto split = detail::require_string(obj, "split", line);
    auto parsed = parse_split(split);
    if (!parsed) {
      throw SchemaError("unknown split tag '" + split + "' on line " + std::to_string(line));
    }
    r.split = *parsed;
    r.embedding = detail::require_vector(obj, "vector", line);
    records.push_back(std::move(r));
  });
  if (records.empty()) throw SchemaError("empty file");
  return records;
}

// Attaches texts from a documents JSONL stream. Unknown doc ids are rejected.
inline void attach_texts(std::vector<DocumentRecord>& records, std::istream& in) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].doc_id, i);
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    const auto id = detail::require_string(obj, "doc_id", line);
    auto it = index.find(id);
    if (it == index.end()) {
      throw SchemaError("documents file references unknown doc_id '" + id + "'");
    }
    records[it->second].text = detail::require_string(obj, "text", line);
  });
}

inline Corpus load_corpus(const std::filesystem::path& embeddings_path,
                          const std::optional<std::filesystem::path>& documents_path = {}) {
  auto in = detail::open_input(embeddings_path);
  auto records = parse_embeddings_jsonl(in);
  if (documents_path) {
    auto docs = detail::open_input(*documents_path);
    attach_texts(records, docs);
  }
  return Corpus(std::move(records));
}

inline void write_embeddings_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records()) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = r.doc_id;
    obj["author_id"] = r.author_id;
    obj["split"] = std::string(to_string(r.split));
    obj["vector"] = r.embedding;
    out << obj.dump() << '\n';
  }
}

inline void write_documents_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records()) {
    if (!r.text) continue;
    nlohmann::ordered_json obj;
    obj["doc_id"] = r.doc_id;
    obj["text"] = *r.text;
    out << obj.dump() << '\n';
  }
}

// Every unordered same-author pair in the split is a positive. Negatives are
// drawn uniformly without replacement from the cross-author pairs, with
// count = round(neg_ratio * positives).
inline std::vector<PairExample> build_pairs(const Corpus& corpus, Split split,
                                            double neg_ratio, std::uint64_t seed) {
  if (!(neg_ratio > 0.0)) throw ComputeError("neg_ratio must be positive");
  const auto idx = corpus.indices_in(split);
  const auto& recs = corpus.records();
  const std::size_t n = idx.size();

  std::vector<PairExample> pairs;
  std::uint64_t cross_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = recs[idx[i]];
      const auto& b = recs[idx[j]];
      if (a.author_id == b.author_id) {
        pairs.push_back({a.doc_id, b.doc_id, true});
      } else {
        ++cross_total;
      }
    }
  }
  if (cross_total == 0) throw ComputeError("no negatives available in split " +
                                           std::string(to_string(split)));
  if (pairs.empty()) throw ComputeError("no positive pairs possible in split " +
                                        std::string(to_string(split)));

  const auto wanted = static_cast<std::uint64_t>(
      std::llround(neg_ratio * static_cast<double>(pairs.size())));
  if (wanted > cross_total) {
    throw ComputeError("requested " + std::to_string(wanted) + " negatives but only " +
                       std::to_string(cross_total) + " cross-author pairs exist");
  }

  std::mt19937_64 rng(seed);
  auto push_negative = [&](std::size_t i, std::size_t j) {
    pairs.push_back({recs[idx[i]].doc_id, recs[idx[j]].doc_id, false});
  };

  if (wanted * 2 >= cross_total) {
    // Dense regime: enumerate and partially shuffle.
    std::vector<std::pair<std::size_t, std::size_t>> all;
    all.reserve(cross_total);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (recs[idx[i]].author_id != recs[idx[j]].author_id) all.emplace_back(i, j);
      }
    }
    for (std::uint64_t t = 0; t < wanted; ++t) {
      std::uniform_int_distribution<std::uint64_t> pick(t, all.size() - 1);
      std::swap(all[t], all[pick(rng)]);
      push_negative(all[t].first, all[t].second);
    }
  } else {
    // Sparse regime: rejection sampling over index pairs.
    std::unordered_set<std::uint64_t> seen;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    while (seen.size() < wanted) {
      std::size_t i = pick(rng), j = pick(rng);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (recs[idx[i]].author_id == recs[idx[j]].author_id) continue;
      if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
      push_negative(i, j);
    }
  }
  return pairs;
}

inline nlohmann::json pairs_to_json(const std::vector<PairExample>& pairs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pairs) {
    arr.push_back({{"doc_a", p.doc_a}, {"doc_b", p.doc_b}, {"label", p.label}});
  }
  return arr;
}

inline std::vector<PairExample> pairs_from_json(const nlohmann::json& arr) {
  std::vector<PairExample> out;
  for (const auto& p : arr) {
    out.push_back({p.at("doc_a").get<std::string>(), p.at("doc_b").get<std::string>(),
                   p.at("label").get<bool>()});
  }
  return out;
}

}  // namespace stylespace

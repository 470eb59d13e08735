#pragma once
// Synthetic authorship corpora: Gaussian style clusters in latent space, each
// with its own style-feature profile. Used by the fixture generator and the
// acceptance suite.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace::synthetic {

struct Options {
  std::size_t clusters = 5;
  std::size_t dim = 32;
  std::size_t train_authors = 30;
  std::size_t dev_authors = 0;
  std::size_t test_authors = 20;
  std::size_t docs_per_author = 4;
  double center_scale = 1.0;   // stddev of cluster centers per coordinate
  double author_spread = 0.3;  // stddev of author means around their center
  double doc_spread = 0.3;     // stddev of documents around their author mean
  std::uint64_t seed = 0;
};

struct Author {
  std::string author_id;
  std::size_t cluster = 0;
  Split split = Split::train;
  Vector mean;
  std::vector<std::string> doc_ids;
};

struct Dataset {
  Corpus corpus;
  std::vector<Vector> centers;
  std::vector<Author> authors;
};

inline std::string padded(std::string_view prefix, std::size_t i, int width = 3) {
  std::string n = std::to_string(i);
  if (n.size() < static_cast<std::size_t>(width)) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
  return std::string(prefix) + n;
}

// Author i belongs to cluster i % clusters; authors are split into
// consecutive train, dev and test blocks.
inline Dataset generate(const Options& opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  for (std::size_t c = 0; c < opts.clusters; ++c) {
    Vector v(opts.dim);
    for (double& x : v) x = opts.center_scale * gauss(rng);
    ds.centers.push_back(std::move(v));
  }
  const std::size_t total = opts.train_authors + opts.dev_authors + opts.test_authors;
  std::vector<DocumentRecord> records;
  for (std::size_t a = 0; a < total; ++a) {
    Author au;
    au.author_id = padded("author", a);
    au.cluster = a % opts.clusters;
    au.split = a < opts.train_authors ? Split::train
               : a < opts.train_authors + opts.dev_authors ? Split::dev
                                                            : Split::test;
    au.mean = ds.centers[au.cluster];
    for (double& x : au.mean) x += opts.author_spread * gauss(rng);
    for (std::size_t d = 0; d < opts.docs_per_author; ++d) {
      DocumentRecord r;
      r.doc_id = padded("doc", a * opts.docs_per_author + d, 4);
      r.author_id = au.author_id;
      r.split = au.split;
      r.embedding = au.mean;
      for (double& x : r.embedding) x += opts.doc_spread * gauss(rng);
      au.doc_ids.push_back(r.doc_id);
      records.push_back(std::move(r));
    }
    ds.authors.push_back(std::move(au));
  }
  ds.corpus = Corpus(std::move(records));
  return ds;
}

// A style feature the simulated describer can emit: a verbose sentence for
// raw descriptions, a short form and a near-duplicate paraphrase of it.
struct StyleTrait {
  const char* level;
  const char* verbose;
  const char* brief;
  const char* brief_alt;
};

inline const std::vector<StyleTrait>& trait_vocabulary() {
  static const std::vector<StyleTrait> v = {
      {"Morphological", "The author uses contractions such as \"don't\" and \"it's\" throughout the text.",
       "The author uses contractions.", "The author uses frequent contractions."},
      {"Morphological", "The author uses technical jargon drawn from a specialized field.",
       "The author uses technical jargon.", "The author uses dense technical jargon."},
      {"Morphological", "The author uses abbreviations and acronyms without expanding them.",
       "The author uses abbreviations.", "The author uses many abbreviations."},
      {"Morphological", "The author uses informal slang words typical of online forums.",
       "The author uses informal slang.", "The author uses casual informal slang."},
      {"Morphological", "The author uses archaic word forms that feel deliberately old-fashioned.",
       "The author uses archaic word forms.", "The author uses old archaic word forms."},
      {"Morphological", "The author uses mathematical notation and symbols inline with the prose.",
       "The author uses mathematical equations.", "The author uses inline mathematical equations."},
      {"Syntactic", "The author uses long compound sentences joined by several clauses.",
       "The author uses long compound sentences.", "The author uses very long compound sentences."},
      {"Syntactic", "The author uses short declarative sentences that state one point each.",
       "The author uses short declarative sentences.", "The author uses brief short declarative sentences."},
      {"Syntactic", "The author uses the passive voice when describing procedures.",
       "The author uses passive voice.", "The author uses frequent passive voice."},
      {"Syntactic", "The author uses numbered step lists to structure instructions.",
       "The author uses numbered step lists.", "The author uses clear numbered step lists."},
      {"Syntactic", "The author uses rhetorical questions to engage the reader directly.",
       "The author uses rhetorical questions.", "The author uses several rhetorical questions."},
      {"Syntactic", "The author uses sentence fragments for emphasis and rhythm.",
       "The author uses sentence fragments.", "The author uses deliberate sentence fragments."},
      {"Semantic", "The author is formal and avoids any colloquial expressions in the text.",
       "The author is formal.", "The author is very formal."},
      {"Semantic", "The author is humorous and frequently makes light-hearted jokes.",
       "The author is humorous.", "The author is quite humorous."},
      {"Semantic", "The author uses vivid imagery to describe scenes and objects in detail.",
       "The author uses vivid imagery.", "The author uses rich vivid imagery."},
      {"Semantic", "The author is emotionally expressive when discussing personal experiences.",
       "The author is emotionally expressive.", "The author is strongly emotionally expressive."},
      {"Semantic", "The author uses precise quantitative claims backed by numbers.",
       "The author uses precise quantitative claims.", "The author uses many precise quantitative claims."},
      {"Semantic", "The author is skeptical and questions the assumptions of others.",
       "The author is skeptical.", "The author is openly skeptical."},
      {"Discourse", "The author uses direct address to the reader with second-person pronouns.",
       "The author uses direct reader address.", "The author uses frequent direct reader address."},
      {"Discourse", "The author uses citations and links to external sources to support claims.",
       "The author uses external citations.", "The author uses numerous external citations."},
      {"Discourse", "The author uses a narrative structure that recounts events in order.",
       "The author uses narrative structure.", "The author uses a narrative structure."},
      {"Discourse", "The author uses a clear argumentative structure with a thesis and support.",
       "The author uses argumentative structure.", "The author uses a clear argumentative structure."},
      {"Discourse", "The author uses personal anecdotes to illustrate general points.",
       "The author uses personal anecdotes.", "The author uses short personal anecdotes."},
      {"Discourse", "The author uses summaries at the end of each section to restate the main points.",
       "The author uses closing summaries.", "The author uses brief closing summaries."},
  };
  return v;
}

// Traits characteristic of each cluster (indices into trait_vocabulary()).
inline std::vector<std::size_t> cluster_profile(std::size_t cluster) {
  static const std::vector<std::vector<std::size_t>> profiles = {
      {1, 5, 8, 16, 19, 21},   // technical, quantitative
      {0, 3, 7, 13, 18, 22},   // casual, humorous
      {4, 6, 14, 15, 20, 10},  // literary
      {2, 9, 8, 12, 23, 1},    // instructional
      {11, 10, 17, 21, 18, 3},  // argumentative
  };
  return profiles[cluster % profiles.size()];
}

// Traits one description of a document mentions: each profile trait with
// probability 0.8 and one of the remaining traits with probability 0.3.
inline std::vector<std::size_t> sample_traits(std::size_t cluster, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(0.8), extra(0.3);
  std::vector<std::size_t> out;
  const auto profile = cluster_profile(cluster);
  for (auto t : profile) {
    if (keep(rng)) out.push_back(t);
  }
  if (extra(rng)) {
    std::uniform_int_distribution<std::size_t> pick(0, trait_vocabulary().size() - 1);
    const auto t = pick(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  if (out.empty()) out.push_back(profile.front());
  std::sort(out.begin(), out.end());
  return out;
}

// Simulated generation response: one heading per level, verbose sentences below.
inline std::string describe(const std::vector<std::size_t>& traits) {
  const auto& vocab = trait_vocabulary();
  std::string out;
  for (const char* level : {"Morphological", "Syntactic", "Semantic", "Discourse"}) {
    out += "**" + std::string(level) + " Level**\n";
    bool any = false;
    for (auto t : traits) {
      if (std::string(vocab[t].level) == level) {
        out += "- " + std::string(vocab[t].verbose) + "\n";
        any = true;
      }
    }
    if (!any) out += "- The author uses no distinctive " + std::string(level) + " features.\n";
    out += "\n";
  }
  return out;
}

// Simulated shortening response: the brief forms as one paragraph, with the
// near-duplicate paraphrase chosen with probability 0.3.
inline std::string shorten(const std::vector<std::size_t>& traits, std::mt19937_64& rng) {
  std::bernoulli_distribution alt(0.3);
  const auto& vocab = trait_vocabulary();
  std::string out;
  for (auto t : traits) {
    if (!out.empty()) out += ' ';
    out += alt(rng) ? vocab[t].brief_alt : vocab[t].brief;
  }
  return out;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull ^ seed;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace stylespace::synthetic

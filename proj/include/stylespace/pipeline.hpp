#pragma once
// Stage functions behind the command-line tool. Every stage reads its inputs
// from the configured paths or from artifacts of earlier stages in the output
// directory, and writes plain JSON/CSV/SVG back there.

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/basis.hpp"
#include "stylespace/config.hpp"
#include "stylespace/corpus.hpp"
#include "stylespace/distributions.hpp"
#include "stylespace/error.hpp"
#include "stylespace/explain.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/metrics.hpp"
#include "stylespace/plots.hpp"
#include "stylespace/prompts.hpp"
#include "stylespace/space.hpp"
#include "stylespace/styles.hpp"
#include "stylespace/stylegen.hpp"

namespace stylespace {

// Re-raises an Error with the stage name prefixed, as the subclass of its kind.
template <class F>
auto run_stage(std::string_view stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw_error(e.kind(), "stage " + std::string(stage) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("stage " + std::string(stage) + ": malformed JSON: " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw InputError("stage " + std::string(stage) + ": " + e.what());
  }
}

// Builds the uncached backend for a model in live mode.
using BackendFactory = std::function<std::shared_ptr<LlmClient>(const std::string& model)>;

namespace artifact {
inline constexpr const char* ingest = "ingest.json";
inline constexpr const char* sweep = "sweep.json";
inline constexpr const char* basis = "basis.json";
inline constexpr const char* descriptions = "descriptions.json";
inline constexpr const char* catalog = "catalog.json";
inline constexpr const char* distributions = "distributions.json";
inline constexpr const char* alignment = "alignment.json";
inline constexpr const char* explanations = "explanations.json";
inline constexpr const char* correlation = "correlation.json";
inline constexpr const char* stability = "stability.json";
}  // namespace artifact

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing artifact " + path.string());
  return nlohmann::json::parse(in);
}

class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, BackendFactory backend = nullptr, std::ostream* log = nullptr)
      : cfg_(std::move(cfg)), backend_(std::move(backend)), log_(log) {
    validate(cfg_);
  }

  const PipelineConfig& config() const noexcept { return cfg_; }
  std::filesystem::path out(const char* name) const { return cfg_.output_dir / name; }

  const Corpus& corpus() {
    if (!corpus_) {
      corpus_ = run_stage("ingest", [&] {
        require_file(cfg_.embeddings, "embeddings file");
        if (cfg_.documents) require_file(*cfg_.documents, "documents file");
        return load_corpus(cfg_.embeddings, cfg_.documents);
      });
    }
    return *corpus_;
  }

  void ingest() {
    const auto& c = corpus();
    run_stage("ingest", [&] {
      nlohmann::ordered_json j;
      j["documents"] = c.size();
      j["dim"] = c.dim();
      j["authors"] = c.authors().size();
      j["splits"] = nlohmann::ordered_json::object();
      for (auto s : {Split::train, Split::dev, Split::test}) j["splits"][std::string(to_string(s))] = c.indices_in(s).size();
      j["has_text"] = std::all_of(c.records().begin(), c.records().end(), [](const auto& r) { return r.text.has_value(); });
      write_json(out(artifact::ingest), j);
      log("ingest: " + std::to_string(c.size()) + " documents, dim " + std::to_string(c.dim()));
    });
  }

  std::vector<AuthorEmbedding> train_authors() {
    auto authors = run_stage("space", [&] { return author_embeddings(corpus(), Split::train); });
    if (cfg_.normalize) {
      for (auto& a : authors) a.vector = normalized(a.vector);
    }
    return authors;
  }

  SweepResult sweep() {
    const auto& c = corpus();
    auto authors = train_authors();
    return run_stage("sweep", [&] {
      if (cfg_.grid.empty()) throw ConfigError("clustering.grid is empty");
      SweepResult result;
      if (cfg_.grid.size() == 1 && c.indices_in(Split::dev).empty()) {
        // Nothing to compare against: the single candidate is the space.
        SweepCandidate cand;
        cand.spec = cfg_.grid.front();
        const auto assignment = run_clustering(vectors_of(authors), cand.spec);
        cand.k = static_cast<std::size_t>(assignment.cluster_count);
        cand.noise = assignment.noise_count();
        cand.basis = centroids_to_basis(assignment, authors);
        result.candidates.push_back(std::move(cand));
      } else {
        const auto dev = build_pairs(c, Split::dev, cfg_.neg_ratio, cfg_.seed);
        result = sweep_clustering(authors, cfg_.grid, dev, c, cfg_.plateau_tolerance, cfg_.max_in_flight);
      }
      write_json(out(artifact::sweep), sweep_to_json(result));
      log("sweep: " + std::to_string(result.candidates.size()) + " candidates, selected " +
          result.candidates[result.selected].spec.describe());
      return result;
    });
  }

  // Selected clustering basis (or the configured precomputed basis).
  InterpretableBasis build_space() {
    if (cfg_.basis) {
      return run_stage("space", [&] {
        require_file(*cfg_.basis, "basis file");
        auto b = load_basis(*cfg_.basis);
        if (b.dim() != corpus().dim()) throw ComputeError("basis dimension does not match the corpus");
        write_json(out(artifact::basis), basis_to_json(b));
        return b;
      });
    }
    auto s = sweep();
    auto b = *s.candidates[s.selected].basis;
    run_stage("space", [&] { write_json(out(artifact::basis), basis_to_json(b)); });
    return b;
  }

  InterpretableBasis baseline_space(BasisSource source, std::size_t k, std::uint64_t seed) {
    auto b = run_stage("space", [&] {
      switch (source) {
        case BasisSource::random:
          return random_basis(train_authors(), k, seed);
        case BasisSource::predefined_feature: {
          if (!cfg_.features) throw ConfigError("paths.features is required for the predefined-feature basis");
          require_file(*cfg_.features, "features file");
          auto in = detail::open_input(*cfg_.features);
          return predefined_feature_basis(parse_feature_examples(in));
        }
        case BasisSource::clustered:
          break;
      }
      throw ConfigError("baseline must be random or predefined_feature");
    });
    run_stage("space", [&] { write_json(out(artifact::basis), basis_to_json(b)); });
    return b;
  }

  InterpretableBasis saved_basis() {
    return run_stage("space", [&] { return basis_from_json(read_json(out(artifact::basis))); });
  }

  std::shared_ptr<LlmClient> client(const std::string& model) {
    if (auto it = clients_.find(model); it != clients_.end()) return it->second;
    auto c = run_stage("stylegen", [&]() -> std::shared_ptr<LlmClient> {
      if (cfg_.cache_dir.empty()) throw ConfigError("paths.cache_dir is not configured");
      if (cfg_.mode == ClientMode::replay && !std::filesystem::is_directory(cfg_.cache_dir)) {
        throw InputError("replay cache directory not found: " + cfg_.cache_dir.string());
      }
      if (!cache_) cache_ = std::make_shared<ReplayCache>(cfg_.cache_dir);
      std::shared_ptr<LlmClient> backend;
      if (cfg_.mode == ClientMode::live) {
        if (!backend_) throw ConfigError("live mode needs an LLM backend");
        backend = backend_(model);
      }
      return std::make_shared<CachedClient>(model, cache_, cfg_.mode, backend);
    });
    clients_.emplace(model, c);
    return c;
  }

  // Generation, shortening and merging over the training documents.
  FeatureCatalog build_style_catalog() {
    const auto& c = corpus();
    auto gen = client(cfg_.generation_model);
    auto shortener = client(cfg_.shortening_model);
    return run_stage("stylegen", [&] {
      GenerationOptions gopts;
      gopts.split = Split::train;
      gopts.temperature = cfg_.temperature;
      gopts.max_in_flight = cfg_.max_in_flight;
      const auto raw = generate_descriptions(*gen, c, generation_template(), gopts);
      const auto shortened =
          shorten_descriptions(*shortener, raw, shortening_template(), cfg_.temperature, cfg_.max_in_flight);
      const LexicalJaccard provider;
      auto catalog = build_catalog(explode(shortened), provider, cfg_.merge_threshold);

      nlohmann::ordered_json jd;
      std::size_t warnings = 0, sentences = 0;
      for (const auto& d : raw) {
        warnings += d.parse_warning() ? 1 : 0;
        sentences += d.sentences.size();
      }
      jd["raw_groups"] = raw.size();
      jd["raw_sentences"] = sentences;
      jd["parse_warnings"] = warnings;
      jd["shortened"] = nlohmann::ordered_json::array();
      for (const auto& s : shortened) jd["shortened"].push_back({{"doc_id", s.doc_id}, {"text", s.text}});
      write_json(out(artifact::descriptions), jd);
      write_json(out(artifact::catalog), catalog_to_json(catalog));
      log("stylegen: " + std::to_string(sentences) + " raw sentences, " + std::to_string(catalog.size()) +
          " features");
      return catalog;
    });
  }

  FeatureCatalog saved_catalog() {
    return run_stage("stylegen", [&] { return catalog_from_json(read_json(out(artifact::catalog))); });
  }

  std::vector<StyleDistribution> assign_styles(const InterpretableBasis& basis, const FeatureCatalog& catalog) {
    return run_stage("distributions", [&] {
      auto dists = point_distributions(basis, catalog);
      write_json(out(artifact::distributions), point_distributions_to_json(basis, dists));
      return dists;
    });
  }

  std::vector<StyleDistribution> saved_distributions() {
    return run_stage("distributions",
                     [&] { return point_distributions_from_json(read_json(out(artifact::distributions))); });
  }

  // Alignment of the interpretable space with the latent space on the
  // evaluation split, plus the random-basis baseline.
  nlohmann::ordered_json evaluate(const InterpretableBasis& basis) {
    const auto& c = corpus();
    auto authors = train_authors();
    return run_stage("evaluate", [&] {
      const auto pairs = build_pairs(c, cfg_.eval_split, cfg_.neg_ratio, cfg_.seed);
      const auto labels = labels_of(pairs);
      const auto latent = latent_pair_scores(pairs, c);
      const auto interp = interpretable_pair_scores(pairs, c, basis);
      const auto report = alignment_report(latent, interp, labels);

      nlohmann::ordered_json j;
      j["split"] = std::string(to_string(cfg_.eval_split));
      j["pairs"] = pairs.size();
      j["positives"] = std::count(labels.begin(), labels.end(), true);
      j["k"] = basis.k();
      j["source"] = std::string(to_string(basis.source()));
      j["interpretable"] = to_json(report);

      if (cfg_.random_seeds > 0 && basis.k() <= authors.size()) {
        double r_sum = 0.0, d_sum = 0.0;
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (std::size_t s = 0; s < cfg_.random_seeds; ++s) {
          const auto rb = random_basis(authors, basis.k(), cfg_.seed + s);
          const auto rr = alignment_report(latent, interpretable_pair_scores(pairs, c, rb), labels);
          r_sum += rr.pearson_r;
          d_sum += rr.delta_eer;
          runs.push_back(to_json(rr));
        }
        const double n = static_cast<double>(cfg_.random_seeds);
        j["random"] = {{"seeds", cfg_.random_seeds}, {"mean_pearson_r", r_sum / n},
                       {"mean_delta_eer", d_sum / n}, {"runs", std::move(runs)}};
      }
      write_json(out(artifact::alignment), j);
      std::ofstream roc(out("roc.csv"), std::ios::binary | std::ios::trunc);
      write_roc_csv(interp, labels, roc);
      log("evaluate: r = " + std::to_string(report.pearson_r) + ", delta EER = " + std::to_string(report.delta_eer));
      return j;
    });
  }

  Explanation explain_one(const std::string& doc, const InterpretableBasis& basis,
                          const std::vector<StyleDistribution>& dists, const FeatureCatalog& catalog,
                          const ExplainOptions& opts) {
    const auto& r = corpus().record(doc);
    auto e = explain_document(doc, r.embedding, basis, dists, opts);
    render(e, catalog);
    return e;
  }

  Explanation explain_two(const std::string& a, const std::string& b, const InterpretableBasis& basis,
                          const std::vector<StyleDistribution>& dists, const FeatureCatalog& catalog,
                          const ExplainOptions& opts) {
    const auto& c = corpus();
    auto e = explain_pair(a, c.record(a).embedding, b, c.record(b).embedding, basis, dists, opts);
    render(e, catalog);
    return e;
  }

  // Document explanations for the given ids (every document of the
  // evaluation split when empty) and for the given pairs.
  nlohmann::ordered_json explain(const InterpretableBasis& basis, const std::vector<StyleDistribution>& dists,
                                 const FeatureCatalog& catalog, std::vector<std::string> docs,
                                 const std::vector<std::pair<std::string, std::string>>& pairs,
                                 bool distractive = false) {
    const auto& c = corpus();
    return run_stage("explain", [&] {
      if (dists.size() != basis.k()) throw ComputeError("distributions do not match the basis");
      ExplainOptions opts{std::min(cfg_.n_dims, basis.k()), cfg_.m_feats, distractive};
      if (docs.empty() && pairs.empty()) {
        for (auto i : c.indices_in(cfg_.eval_split)) docs.push_back(c.records()[i].doc_id);
      }
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& d : docs) j.push_back(explanation_to_json(explain_one(d, basis, dists, catalog, opts), basis, catalog));
      for (const auto& [a, b] : pairs) {
        j.push_back(explanation_to_json(explain_two(a, b, basis, dists, catalog, opts), basis, catalog));
      }
      write_json(out(artifact::explanations), j);
      return j;
    });
  }

  // Latent, style and topic dissimilarities over documents that have both
  // catalog features and a topic vector.
  std::vector<CorrelationEntry> correlate(const FeatureCatalog& catalog, const std::string& plot_format = "svg") {
    const auto& c = corpus();
    return run_stage("correlate", [&] {
      if (!cfg_.topics) throw ConfigError("paths.topics is required for correlate");
      require_file(*cfg_.topics, "topics file");
      auto in = detail::open_input(*cfg_.topics);
      std::unordered_map<std::string, Vector> topics;
      detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
        topics[detail::require_string(obj, "doc_id", line)] = detail::require_vector(obj, "topics", line);
      });
      std::vector<LabeledVector> latent, style, topic;
      for (const auto& r : c.records()) {
        auto f = catalog.doc_features.find(r.doc_id);
        auto t = topics.find(r.doc_id);
        if (f == catalog.doc_features.end() || f->second.empty() || t == topics.end()) continue;
        Vector s(catalog.size(), 0.0);
        for (auto id : f->second) s[id] = 1.0 / static_cast<double>(f->second.size());
        latent.push_back({r.doc_id, r.embedding});
        style.push_back({r.doc_id, std::move(s)});
        topic.push_back({r.doc_id, StyleDistribution::from_weights(t->second).probs()});
      }
      if (latent.size() < 3) throw ComputeError("correlate needs at least 3 documents with features and topics");
      const auto entries = representation_correlation(
          pairwise_dissimilarity(latent, DissimilarityMetric::cosine_distance),
          pairwise_dissimilarity(style, DissimilarityMetric::symmetric_kl, cfg_.kl_eps),
          pairwise_dissimilarity(topic, DissimilarityMetric::symmetric_kl, cfg_.kl_eps));
      auto j = nlohmann::ordered_json::object();
      j["documents"] = latent.size();
      j["entries"] = to_json(entries);
      write_json(out(artifact::correlation), j);
      emit_plots(entries, plot_format, cfg_.output_dir / "correlation");
      return entries;
    });
  }

  StabilityResult stability(const FeatureCatalog& catalog, const std::string& plot_format = "svg") {
    const auto& c = corpus();
    auto gen = client(cfg_.generation_model);
    auto shortener = client(cfg_.shortening_model);
    return run_stage("stability", [&] {
      if (!cfg_.stability_author) throw ConfigError("stability.author is not configured");
      std::vector<AuthorDocument> docs;
      for (const auto& r : c.records()) {
        if (r.author_id != *cfg_.stability_author) continue;
        if (!r.text) throw InputError("document " + r.doc_id + " has no text");
        docs.push_back({r.doc_id, *r.text});
      }
      if (docs.empty()) throw InputError("unknown stability author " + *cfg_.stability_author);
      StabilityOptions opts;
      opts.rounds = cfg_.rounds;
      opts.repeats = cfg_.repeats;
      opts.seed = cfg_.seed;
      opts.temperature = cfg_.temperature;
      opts.match_threshold = cfg_.merge_threshold;
      opts.kl_eps = cfg_.kl_eps;
      opts.shortening = shortening_template();
      const LexicalJaccard provider;
      auto result = run_stability_experiment(*gen, shortener.get(), docs, paraphrased_generation_variants(),
                                             catalog, provider, opts);
      nlohmann::ordered_json j;
      j["author"] = *cfg_.stability_author;
      j["documents"] = docs.size();
      j["rounds"] = cfg_.rounds;
      j["repeats"] = cfg_.repeats;
      j["trace"] = nlohmann::ordered_json::array();
      for (const auto& p : result.mean.series) j["trace"].push_back({{"t", p.t}, {"S_t", p.value}, {"stddev", p.stddev}});
      write_json(out(artifact::stability), j);
      emit_plots(result.mean, plot_format, cfg_.output_dir / "stability");
      log("stability: S_2 = " + std::to_string(result.mean.series.front().value) +
          ", S_" + std::to_string(result.mean.series.back().t) + " = " + std::to_string(result.mean.series.back().value));
      return result;
    });
  }

  // ingest -> space -> catalog -> distributions -> evaluate -> explain, then
  // the optional correlation and stability analyses.
  void run_all(const std::string& plot_format = "svg") {
    ingest();
    const auto basis = build_space();
    const auto catalog = build_style_catalog();
    const auto dists = assign_styles(basis, catalog);
    evaluate(basis);
    explain(basis, dists, catalog, {}, {});
    if (cfg_.topics) correlate(catalog, plot_format);
    if (cfg_.stability_author) stability(catalog, plot_format);
  }

 private:
  void log(const std::string& msg) {
    if (log_) *log_ << msg << '\n';
  }

  void render(Explanation& e, const FeatureCatalog& catalog) {
    if (e.features.empty()) return;
    if (!cfg_.rephrase) {
      e.rendered = render_explanation(e, catalog);
      return;
    }
    auto c = client(cfg_.rephrase_model);
    e.rendered = run_stage("stylegen", [&] {
      return render_explanation(e, catalog, c.get(), rephrase_template(), cfg_.temperature);
    });
  }

  PipelineConfig cfg_;
  BackendFactory backend_;
  std::ostream* log_;
  std::optional<Corpus> corpus_;
  std::shared_ptr<ReplayCache> cache_;
  std::unordered_map<std::string, std::shared_ptr<LlmClient>> clients_;
};

}  // namespace stylespace

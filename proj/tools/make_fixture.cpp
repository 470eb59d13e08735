// make_fixture: writes the bundled synthetic corpus together with a replay
// cache of simulated LLM responses, so the whole pipeline runs offline.
//
//   make_fixture OUT_DIR [--seed N]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stylespace/corpus.hpp"
#include "stylespace/llm.hpp"
#include "stylespace/prompts.hpp"
#include "stylespace/stylegen.hpp"
#include "stylespace/synthetic.hpp"

namespace fs = std::filesystem;
using namespace stylespace;

namespace {

constexpr const char* kGenerationModel = "llama3-8b";
constexpr const char* kShorteningModel = "gpt-3.5-turbo";
constexpr std::size_t kTopics = 8;

std::string document_text(const synthetic::Author& a, const std::string& doc_id, std::mt19937_64& rng) {
  const auto& vocab = synthetic::trait_vocabulary();
  std::string text = "Post " + doc_id + ".";
  for (auto t : synthetic::sample_traits(a.cluster, rng)) text += " " + std::string(vocab[t].brief);
  return text;
}

// Records the generation response and the shortening response that follows it.
void record(ReplayCache& cache, const PromptTemplate& tmpl, const std::string& doc_id, const std::string& text,
            std::size_t cluster, std::uint64_t seed) {
  std::mt19937_64 rng(synthetic::mix_seed(seed, doc_id + "/" + tmpl.text()));
  const auto traits = synthetic::sample_traits(cluster, rng);
  const auto gen_prompt = tmpl.fill(text);
  const auto response = synthetic::describe(traits);
  cache.put(cache_key(kGenerationModel, 0.0, gen_prompt), gen_prompt, response);

  const auto groups = parse_style_response(doc_id, response);
  std::vector<const RawStyleDescription*> ptrs;
  for (const auto& g : groups) ptrs.push_back(&g);
  const auto short_prompt = shortening_template().fill(format_for_shortening(ptrs));
  cache.put(cache_key(kShorteningModel, 0.0, short_prompt), short_prompt, synthetic::shorten(traits, rng));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic fixture"};
  std::string out_dir;
  std::uint64_t seed = 7;
  app.add_option("out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "random seed");
  CLI11_PARSE(app, argc, argv);

  synthetic::Options opts;
  opts.clusters = 5;
  opts.dim = 16;
  opts.train_authors = 20;
  opts.dev_authors = 10;
  opts.test_authors = 10;
  opts.docs_per_author = 3;
  opts.seed = seed;
  auto ds = synthetic::generate(opts);

  const fs::path out(out_dir);
  fs::create_directories(out);
  fs::remove_all(out / "cache");

  std::mt19937_64 text_rng(synthetic::mix_seed(seed, "text"));
  std::unordered_map<std::string, const synthetic::Author*> author_of;
  std::vector<DocumentRecord> records = ds.corpus.records();
  for (const auto& a : ds.authors) {
    for (const auto& d : a.doc_ids) author_of[d] = &a;
  }
  for (auto& r : records) r.text = document_text(*author_of.at(r.doc_id), r.doc_id, text_rng);
  const Corpus corpus(std::move(records));
  {
    std::ofstream e(out / "embeddings.jsonl", std::ios::binary);
    write_embeddings_jsonl(corpus, e);
    std::ofstream d(out / "documents.jsonl", std::ios::binary);
    write_documents_jsonl(corpus, d);
  }

  // Topic mixtures are drawn independently of authors and clusters.
  {
    std::mt19937_64 rng(synthetic::mix_seed(seed, "topics"));
    std::gamma_distribution<double> gamma(0.5, 1.0);
    std::ofstream t(out / "topics.jsonl", std::ios::binary);
    for (const auto& r : corpus.records()) {
      std::vector<double> v(kTopics);
      double sum = 0.0;
      for (double& x : v) sum += (x = gamma(rng));
      for (double& x : v) x /= sum;
      nlohmann::ordered_json j;
      j["doc_id"] = r.doc_id;
      j["topics"] = v;
      t << j.dump() << '\n';
    }
  }

  ReplayCache cache(out / "cache");
  const auto main_tmpl = generation_template();
  std::size_t entries = 0;
  for (const auto& r : corpus.records()) {
    if (r.split != Split::train) continue;
    record(cache, main_tmpl, r.doc_id, *r.text, author_of.at(r.doc_id)->cluster, seed);
    entries += 2;
  }
  const auto& subject = ds.authors.front();
  for (const auto& v : paraphrased_generation_variants()) {
    for (const auto& d : subject.doc_ids) {
      record(cache, v, d, *corpus.record(d).text, subject.cluster, seed);
      entries += 2;
    }
  }

  std::ofstream cfg(out / "config.ini", std::ios::binary);
  cfg << "# Synthetic fixture: 40 authors in 5 style clusters, 3 documents each.\n"
         "[paths]\n"
         "embeddings = embeddings.jsonl\n"
         "documents = documents.jsonl\n"
         "cache_dir = cache\n"
         "topics = topics.jsonl\n"
         "\n[clustering]\n"
         "grid = kmeans:k=3; kmeans:k=4; kmeans:k=5; kmeans:k=6; kmeans:k=8; "
         "agglomerative:k=5,linkage=average; dbscan:eps=0.2,min_pts=2\n"
         "\n[seeds]\nseed = 7\n"
         "\n[llm]\nmode = replay\ngeneration_model = "
      << kGenerationModel << "\nshortening_model = " << kShorteningModel
      << "\n"
         "\n[stability]\nauthor = "
      << subject.author_id << "\nrounds = 25\nrepeats = 10\n";
  std::cout << "wrote " << corpus.size() << " documents and " << entries << " cache entries to " << out << '\n';
  return 0;
}

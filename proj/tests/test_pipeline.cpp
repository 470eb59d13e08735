#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "stylespace/config.hpp"
#include "stylespace/pipeline.hpp"
#include "support.hpp"

using namespace stylespace;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = STYLESPACE_FIXTURE_DIR;

struct CliResult {
  int code = -1;
  std::string err;
  std::string out;
};

CliResult cli(const std::string& args, const TempDir& scratch) {
  const auto err = scratch / "stderr.txt", out = scratch / "stdout.txt";
  const std::string cmd = std::string("\"") + STYLESPACE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testing_support::read_file(err);
  r.out = testing_support::read_file(out);
  return r;
}

std::string fixture_args(const fs::path& out) {
  return "-c \"" + (kFixture / "config.ini").string() + "\" -o \"" + out.string() + "\"";
}

PipelineConfig fixture_config(const fs::path& out) {
  auto kv = load_key_values(kFixture / "config.ini");
  kv["paths.output_dir"] = out.string();
  kv["stability.repeats"] = "2";
  kv["stability.rounds"] = "4";
  return config_from_key_values(kv, kFixture);
}

}  // namespace

TEST(Cli, FullRunWritesEveryArtifact) {
  TempDir dir;
  const auto r = cli(fixture_args(dir / "out") + " -q run", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"ingest.json", "sweep.json", "basis.json", "descriptions.json", "catalog.json",
                           "distributions.json", "alignment.json", "explanations.json", "correlation.json",
                           "stability.json", "roc.csv", "stability.csv", "stability.svg", "correlation.csv",
                           "correlation.svg"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / "out" / name)) << name;
  }
  const auto stability = nlohmann::json::parse(testing_support::read_file(dir / "out" / "stability.json"));
  EXPECT_EQ(stability["trace"].size(), 24u);
  const auto basis = load_basis(dir / "out" / "basis.json");
  const auto dists = nlohmann::json::parse(testing_support::read_file(dir / "out" / "distributions.json"));
  EXPECT_EQ(dists["points"].size(), basis.k());
}

TEST(Cli, StagesRunIndividually) {
  TempDir dir;
  const auto base = fixture_args(dir / "out") + " -q ";
  for (const char* stage : {"ingest", "sweep", "build-space", "assign-styles", "evaluate", "correlate"}) {
    const auto r = cli(base + stage, dir);
    ASSERT_EQ(r.code, 0) << stage << ": " << r.err;
  }
  EXPECT_EQ(cli(base + "assign-styles --reuse-catalog", dir).code, 0);
  const auto shown = cli(fixture_args(dir / "out") + " explain --doc doc0000 --pair doc0000,doc0001", dir);
  ASSERT_EQ(shown.code, 0) << shown.err;
  const auto j = nlohmann::json::parse(shown.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["subject"], "doc0000");
  EXPECT_EQ(j[1]["subject"].size(), 2u);
  EXPECT_EQ(cli(base + "--set stability.repeats=2 --plot-format csv stability", dir).code, 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "stability.csv"));
}

TEST(Cli, RandomBaselineBasis) {
  TempDir dir;
  const auto base = fixture_args(dir / "out") + " -q ";
  ASSERT_EQ(cli(base + "build-space --baseline random --k 4 --baseline-seed 3", dir).code, 0);
  const auto b = load_basis(dir / "out" / "basis.json");
  EXPECT_EQ(b.k(), 4u);
  EXPECT_EQ(b.source(), BasisSource::random);
  EXPECT_EQ(cli(base + "build-space --baseline random", dir).code, 1);
}

TEST(Cli, MissingReplayCacheNamesTheStage) {
  TempDir dir;
  const auto r = cli(fixture_args(dir / "out") + " -q --cache-dir \"" + (dir / "no-cache").string() + "\" run", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stylegen"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out" / "catalog.json"));
}

TEST(Cli, CacheMissExitsWithInputCode) {
  TempDir dir;
  fs::create_directories(dir / "empty");
  const auto r = cli(fixture_args(dir / "out") + " -q --cache-dir \"" + (dir / "empty").string() + "\" run", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cache miss"), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrorsWriteNothing) {
  TempDir dir;
  for (const char* bad : {"--set thresholds.merge=5", "--set no.such_key=1", "--set llm.mode=offline",
                          "--set broken"}) {
    const auto r = cli(fixture_args(dir / "out") + " -q " + bad + " run", dir);
    EXPECT_EQ(r.code, 1) << bad;
    EXPECT_FALSE(fs::exists(dir / "out")) << bad;
  }
  EXPECT_EQ(cli("-q -o \"" + (dir / "out").string() + "\" --plot-format png run", dir).code, 1);
  EXPECT_EQ(cli("", dir).code, 1);
}

TEST(Cli, MissingInputExitsWithInputCode) {
  TempDir dir;
  const auto r = cli(fixture_args(dir / "out") + " -q --set paths.embeddings=" + (dir / "nope.jsonl").string() +
                         " ingest",
                     dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ingest"), std::string::npos);
  const auto no_basis = cli(fixture_args(dir / "other") + " -q evaluate", dir);
  EXPECT_EQ(no_basis.code, 2);
}

TEST(Pipeline, InProcessStagesAgreeWithSavedArtifacts) {
  TempDir dir;
  Pipeline p(fixture_config(dir / "out"));
  const auto basis = p.build_space();
  const auto catalog = p.build_style_catalog();
  const auto dists = p.assign_styles(basis, catalog);
  EXPECT_EQ(basis_to_json(p.saved_basis()), basis_to_json(basis));
  EXPECT_EQ(catalog_to_json(p.saved_catalog()), catalog_to_json(catalog));
  const auto saved = p.saved_distributions();
  ASSERT_EQ(saved.size(), dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) EXPECT_EQ(saved[i].probs(), dists[i].probs());

  const auto j = p.explain(basis, dists, catalog, {}, {});
  EXPECT_EQ(j.size(), p.corpus().indices_in(Split::test).size());
  for (const auto& e : j) {
    EXPECT_LE(e["features"].size(), 30u);
    EXPECT_EQ(e["dimensions"].size(), 3u);
  }
  const auto report = p.evaluate(basis);
  EXPECT_GE(report["interpretable"]["pearson_r"].get<double>(), 0.9);
  const auto st = p.stability(catalog, "csv");
  EXPECT_EQ(st.runs.size(), 2u);
  EXPECT_EQ(st.mean.series.size(), 3u);
}

TEST(Pipeline, LiveModeNeedsABackend) {
  TempDir dir;
  auto cfg = fixture_config(dir / "out");
  cfg.mode = ClientMode::live;
  cfg.cache_dir = dir / "cache";
  Pipeline p(cfg);
  EXPECT_THROW(p.build_style_catalog(), ConfigError);
}

TEST(Pipeline, LiveModeRecordsThroughTheBackend) {
  TempDir dir;
  auto cfg = fixture_config(dir / "out");
  cfg.mode = ClientMode::live;
  cfg.cache_dir = dir / "cache";
  auto backend = std::make_shared<ReplayCache>(kFixture / "cache");
  // Serve live calls from the fixture recordings, keyed the same way.
  class Forward : public LlmClient {
   public:
    Forward(std::string model, std::shared_ptr<ReplayCache> c) : model_(std::move(model)), c_(std::move(c)) {}
    std::string complete(const std::string& prompt, double t) override {
      return c_->get(cache_key(model_, t, prompt)).value();
    }
    std::string model_id() const override { return model_; }

   private:
    std::string model_;
    std::shared_ptr<ReplayCache> c_;
  };
  Pipeline live(cfg, [&](const std::string& model) { return std::make_shared<Forward>(model, backend); });
  const auto catalog = live.build_style_catalog();
  EXPECT_FALSE(fs::is_empty(dir / "cache"));

  cfg.mode = ClientMode::replay;
  Pipeline replay(cfg);
  EXPECT_EQ(catalog_to_json(replay.build_style_catalog()), catalog_to_json(catalog));
}

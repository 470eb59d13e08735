// stylespace: command-line front end for the interpretable-space pipeline.
//
// Settings come from a sectioned config file, then the STYLESPACE_CACHE_DIR
// environment variable, then --set key=value overrides, then dedicated flags.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "stylespace/config.hpp"
#include "stylespace/error.hpp"
#include "stylespace/llm_http.hpp"
#include "stylespace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stylespace;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string cache_dir;
  std::string mode;
  std::string plot_format = "svg";
  bool quiet = false;
};

PipelineConfig resolve_config(const CommonFlags& f) {
  KeyValues kv;
  fs::path base;
  if (!f.config.empty()) {
    kv = load_key_values(f.config);
    base = fs::path(f.config).parent_path();
  }
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) kv["paths.cache_dir"] = fs::absolute(env).string();
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    auto key = s.substr(0, eq), value = s.substr(eq + 1);
    // Paths given on the command line are relative to the working directory.
    if (key.rfind("paths.", 0) == 0 && !value.empty()) value = fs::absolute(value).string();
    kv[key] = value;
  }
  if (!f.out.empty()) kv["paths.output_dir"] = fs::absolute(f.out).string();
  if (!f.cache_dir.empty()) kv["paths.cache_dir"] = fs::absolute(f.cache_dir).string();
  if (!f.mode.empty()) kv["llm.mode"] = f.mode;
  return config_from_key_values(kv, base);
}

std::shared_ptr<LlmClient> http_backend(const std::string& model) {
  return std::make_shared<HttpChatClient>(HttpChatClient::from_env(model));
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == s.size()) {
    throw ConfigError("--pair expects DOC_A,DOC_B, got '" + s + "'");
  }
  return {s.substr(0, comma), s.substr(comma + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable style spaces for authorship-attribution embeddings"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("-c,--config", flags.config, "config file")->check(CLI::ExistingFile);
  app.add_option("--set", flags.sets, "override a config key (section.key=value)");
  app.add_option("-o,--out", flags.out, "output directory");
  app.add_option("--cache-dir", flags.cache_dir, "LLM response cache directory");
  app.add_option("--mode", flags.mode, "LLM mode")->check(CLI::IsMember({"live", "replay"}));
  app.add_option("--plot-format", flags.plot_format, "plot format")->check(CLI::IsMember({"svg", "csv"}));
  app.add_flag("-q,--quiet", flags.quiet, "no progress output");

  auto* ingest = app.add_subcommand("ingest", "validate the corpus and write a summary");
  auto* sweep = app.add_subcommand("sweep", "evaluate every clustering in the grid on dev pairs");
  auto* build = app.add_subcommand("build-space", "build the interpretable basis");
  std::string baseline = "clustered";
  std::size_t baseline_k = 0;
  std::uint64_t baseline_seed = 0;
  build->add_option("--baseline", baseline, "clustered, random or predefined_feature")
      ->check(CLI::IsMember({"clustered", "random", "predefined_feature"}));
  build->add_option("--k", baseline_k, "number of points for the random baseline");
  build->add_option("--baseline-seed", baseline_seed, "seed for the random baseline");
  auto* assign = app.add_subcommand("assign-styles", "build the style catalog and point distributions");
  bool reuse_catalog = false;
  assign->add_flag("--reuse-catalog", reuse_catalog, "use catalog.json from the output directory");
  auto* evaluate = app.add_subcommand("evaluate", "alignment of interpretable and latent predictions");
  auto* explain = app.add_subcommand("explain", "explain documents or document pairs");
  std::vector<std::string> docs, pairs;
  bool distractive = false;
  explain->add_option("--doc", docs, "document id");
  explain->add_option("--pair", pairs, "DOC_A,DOC_B");
  explain->add_flag("--distractive", distractive, "use the least similar dimensions (debugging)");
  auto* correlate = app.add_subcommand("correlate", "latent/style/topic representation correlation");
  auto* stability = app.add_subcommand("stability", "repeated-prompting stability of style distributions");
  auto* run = app.add_subcommand("run", "run every stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Pipeline p(resolve_config(flags), http_backend, flags.quiet ? nullptr : &std::cerr);
    if (ingest->parsed()) {
      p.ingest();
    } else if (sweep->parsed()) {
      p.sweep();
    } else if (build->parsed()) {
      if (baseline == "clustered") {
        p.build_space();
      } else {
        const auto source = parse_basis_source(baseline);
        if (source == BasisSource::random && baseline_k < 2) throw ConfigError("--k >= 2 is required for the random baseline");
        p.baseline_space(source, baseline_k, baseline_seed);
      }
    } else if (assign->parsed()) {
      const auto basis = p.saved_basis();
      const auto catalog = reuse_catalog ? p.saved_catalog() : p.build_style_catalog();
      p.assign_styles(basis, catalog);
    } else if (evaluate->parsed()) {
      p.evaluate(p.saved_basis());
    } else if (explain->parsed()) {
      std::vector<std::pair<std::string, std::string>> pp;
      for (const auto& s : pairs) pp.push_back(split_pair(s));
      const auto j = p.explain(p.saved_basis(), p.saved_distributions(), p.saved_catalog(), docs, pp, distractive);
      if (!flags.quiet) std::cout << j.dump(2) << '\n';
    } else if (correlate->parsed()) {
      p.correlate(p.saved_catalog(), flags.plot_format);
    } else if (stability->parsed()) {
      p.stability(p.saved_catalog(), flags.plot_format);
    } else if (run->parsed()) {
      p.run_all(flags.plot_format);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::computation);
  }
  return 0;
}

#pragma once
// Shared helpers for the test binaries.

#include <filesystem>
#include <fstream>
#include <atomic>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/llm.hpp"

namespace testing_support {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("stylespace-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> random_simplex(std::size_t k, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (double& x : v) s += (x = e(rng));
  for (double& x : v) x /= s;
  return v;
}

inline stylespace::DocumentRecord doc(std::string id, std::string author, stylespace::Split split,
                                      std::vector<double> v) {
  return {std::move(id), std::move(author), split, std::move(v), std::nullopt};
}

// Canned responses keyed by exact prompt; anything else throws.
class ScriptedClient : public stylespace::LlmClient {
 public:
  explicit ScriptedClient(std::string model = "scripted") : model_(std::move(model)) {}
  void on(const std::string& prompt, const std::string& response) { script_[prompt] = response; }
  std::string complete(const std::string& prompt, double) override {
    ++calls;
    auto it = script_.find(prompt);
    if (it == script_.end()) throw stylespace::InputError("unscripted prompt");
    return it->second;
  }
  std::string model_id() const override { return model_; }
  std::atomic<std::size_t> calls{0};

 private:
  std::string model_;
  std::map<std::string, std::string> script_;
};

}  // namespace testing_support

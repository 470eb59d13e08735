#pragma once
// LLM client interface and the content-addressed replay cache.
//
// Cache layout: one JSON file per request, named by the hex SHA-256 of
// "<model id>\n<temperature %.4f>\n<prompt>", holding
//   {"prompt": str, "response": str}

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "stylespace/error.hpp"

namespace stylespace {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw ComputeError("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string cache_key(std::string_view model_id, double temperature, std::string_view prompt) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.4f", temperature);
  std::string material;
  material.reserve(model_id.size() + prompt.size() + 16);
  material.append(model_id).append("\n").append(temp).append("\n").append(prompt);
  return sha256_hex(material);
}

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt, double temperature) = 0;
  virtual std::string model_id() const = 0;
};

// Directory of recorded responses. Reads are memoized; writes are serialized.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::optional<std::string> get(const std::string& key) const {
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const auto path = dir_ / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("corrupt cache entry " + path.string() + ": " + e.what());
    }
    auto response = j.at("response").get<std::string>();
    std::lock_guard lock(mu_);
    memo_.emplace(key, response);
    return response;
  }

  void put(const std::string& key, const std::string& prompt, const std::string& response) {
    std::lock_guard lock(mu_);
    std::filesystem::create_directories(dir_);
    nlohmann::ordered_json j;
    j["prompt"] = prompt;
    j["response"] = response;
    const auto final_path = dir_ / (key + ".json");
    const auto tmp_path = dir_ / (key + ".json.tmp");
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write cache entry " + tmp_path.string());
      out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
    memo_[key] = response;
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::string> memo_;
};

enum class ClientMode { live, replay };

// Cache-first client. Replay mode never touches the backend; a miss throws
// CacheMiss. Live mode records every backend response.
class CachedClient : public LlmClient {
 public:
  CachedClient(std::string model_id, std::shared_ptr<ReplayCache> cache, ClientMode mode,
               std::shared_ptr<LlmClient> backend = nullptr)
      : model_id_(std::move(model_id)), cache_(std::move(cache)), mode_(mode),
        backend_(std::move(backend)) {
    if (mode_ == ClientMode::live && !backend_) {
      throw ConfigError("live mode requires an LLM backend");
    }
  }

  std::string complete(const std::string& prompt, double temperature) override {
    const auto key = cache_key(model_id_, temperature, prompt);
    if (auto hit = cache_->get(key)) return *hit;
    if (mode_ == ClientMode::replay) {
      throw CacheMiss("no recorded response for model " + model_id_ + " (key " + key + ")");
    }
    auto response = backend_->complete(prompt, temperature);
    cache_->put(key, prompt, response);
    return response;
  }

  std::string model_id() const override { return model_id_; }
  ClientMode mode() const noexcept { return mode_; }

 private:
  std::string model_id_;
  std::shared_ptr<ReplayCache> cache_;
  ClientMode mode_;
  std::shared_ptr<LlmClient> backend_;
};

// Completes every prompt with at most max_in_flight concurrent requests.
// Responses come back in prompt order; the first failure (in prompt order)
// is rethrown.
inline std::vector<std::string> complete_all(LlmClient& client, const std::vector<std::string>& prompts,
                                             double temperature, std::size_t max_in_flight = 4) {
  std::vector<std::string> out(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        out[i] = client.complete(prompts[i], temperature);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(1, prompts.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace stylespace

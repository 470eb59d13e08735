#pragma once
// Chat-completions HTTP backend. Only the CLI and its tests include this
// header, so the core library stays free of networking.
//
// Environment:
//   STYLESPACE_LLM_ENDPOINT  base URL, e.g. https://api.openai.com
//   STYLESPACE_LLM_API_KEY   bearer token (optional for local servers)

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stylespace/error.hpp"
#include "stylespace/llm.hpp"

namespace stylespace {

inline constexpr const char* kEndpointEnv = "STYLESPACE_LLM_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "STYLESPACE_LLM_API_KEY";
inline constexpr const char* kCacheDirEnv = "STYLESPACE_CACHE_DIR";

class HttpChatClient : public LlmClient {
 public:
  HttpChatClient(std::string base_url, std::string api_key, std::string model,
                 std::string path = "/v1/chat/completions")
      : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)),
        path_(std::move(path)) {}

  static HttpChatClient from_env(std::string model) {
    const char* url = std::getenv(kEndpointEnv);
    if (!url || !*url) throw ConfigError(std::string(kEndpointEnv) + " is not set");
    const char* key = std::getenv(kApiKeyEnv);
    return HttpChatClient(url, key ? key : "", std::move(model));
  }

  static nlohmann::json request_body(const std::string& model, const std::string& prompt,
                                     double temperature) {
    return {{"model", model},
            {"temperature", temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  }

  std::string complete(const std::string& prompt, double temperature) override {
    httplib::Client http(base_url_);
    http.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = http.Post(path_, headers, request_body(model_, prompt, temperature).dump(),
                         "application/json");
    if (!res) {
      throw InputError("LLM endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw InputError("LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      const auto body = nlohmann::json::parse(res->body);
      return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed completion response: ") + e.what());
    }
  }

  std::string model_id() const override { return model_; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
  std::string path_;
};

}  // namespace stylespace

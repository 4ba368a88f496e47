#pragma once

// Chat-completions client with a disk-backed response cache and bounded
// exponential-backoff retries.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "argllm/backend.hpp"
#include "argllm/document.hpp"
#include "argllm/error.hpp"

namespace argllm {

struct ModelConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  std::string api_key;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_new_tokens_argument = 128;  // argument generation and scoring calls
  int max_new_tokens_baseline = 768;
  double repetition_penalty = 1.0;
  int timeout_seconds = 60;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 4;

  int max_new_tokens(Purpose p) const {
    return p == Purpose::baseline ? max_new_tokens_baseline : max_new_tokens_argument;
  }
};

/// Overrides from ARGLLM_API_KEY, ARGLLM_ENDPOINT and ARGLLM_MODEL.
inline ModelConfig model_config_from_env(ModelConfig base = {}) {
  if (const char* v = std::getenv("ARGLLM_API_KEY")) base.api_key = v;
  if (const char* v = std::getenv("ARGLLM_ENDPOINT")) base.endpoint_url = v;
  if (const char* v = std::getenv("ARGLLM_MODEL")) base.model_name = v;
  return base;
}

inline std::string default_cache_dir() {
  if (const char* v = std::getenv("ARGLLM_CACHE_DIR")) return v;
  return ".argllm-cache";
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::backend_failure, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache: one JSON file per key under a directory.

struct CacheEntry {
  std::string key;
  std::string response_text;
  std::string created_at;
};

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  /// `raw_prompt` is mixed in separately because the wire body replaces
  /// invalid UTF-8, which would otherwise let distinct prompts share a key.
  static std::string make_key(const std::string& endpoint, const std::string& model, const std::string& body,
                              int attempt = 0, std::string_view raw_prompt = {}) {
    std::string material = endpoint + '\n' + model + '\n' + body;
    if (!raw_prompt.empty()) material += "\n#prompt=" + sha256_hex(raw_prompt);
    if (attempt > 0) material += "\n#attempt=" + std::to_string(attempt);
    return sha256_hex(material);
  }

  std::optional<CacheEntry> get(const std::string& key) const {
    auto path = file_for(key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
      Json j = Json::parse(in);
      return CacheEntry{j.at("key").get<std::string>(), j.at("response_text").get<std::string>(),
                        j.value("created_at", std::string())};
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;  // torn or foreign file: treat as a miss
    }
  }

  void put(const std::string& key, const Json& request, const std::string& response_text) {
    Json j{{"key", key}, {"request", request}, {"response_text", response_text}, {"created_at", utc_timestamp()}};
    std::lock_guard lock(mu_);
    auto path = file_for(key);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << j.dump(2, ' ', false, Json::error_handler_t::replace);
    }
    std::filesystem::rename(tmp, path);
  }

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path file_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::filesystem::path dir_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Client

struct Endpoint {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path;              // e.g. "/v1/chat/completions"
};

inline Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::precondition, "endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.scheme_host_port = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "" : url.substr(path_start);
  if (e.path.empty() || e.path == "/") e.path = "/v1/chat/completions";
  return e;
}

struct CachePolicy {
  bool read = true;
  bool write = true;
};

class LlmClient {
 public:
  LlmClient(ModelConfig config, std::shared_ptr<ResponseCache> cache = nullptr, CachePolicy policy = {})
      : config_(std::move(config)),
        endpoint_(parse_endpoint(config_.endpoint_url)),
        cache_(std::move(cache)),
        policy_(policy),
        slots_(std::max(1, std::min(config_.max_in_flight, 64))) {}

  const ModelConfig& config() const { return config_; }

  Json request_body(const std::string& prompt, Purpose purpose) const {
    Json body;
    body["model"] = config_.model_name;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;
    body["top_p"] = config_.top_p;
    body["max_tokens"] = config_.max_new_tokens(purpose);
    body["repetition_penalty"] = config_.repetition_penalty;
    return body;
  }

  std::string cache_key(const std::string& prompt, Purpose purpose, int attempt = 0) const {
    return ResponseCache::make_key(config_.endpoint_url, config_.model_name, wire(request_body(prompt, purpose)),
                                   attempt, prompt);
  }

  std::string complete(const std::string& prompt, Purpose purpose, int attempt = 0) {
    const Json body = request_body(prompt, purpose);
    const std::string body_text = wire(body);
    const std::string key = cache_key(prompt, purpose, attempt);
    if (cache_ && policy_.read) {
      if (auto hit = cache_->get(key)) {
        ++cache_hits_;
        return hit->response_text;
      }
    }
    std::string text = send_with_retries(body_text);
    if (cache_ && policy_.write) cache_->put(key, body, text);
    return text;
  }

  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  static std::string wire(const Json& body) { return body.dump(-1, ' ', false, Json::error_handler_t::replace); }

  std::string send_with_retries(const std::string& body_text) {
    auto delay = config_.initial_backoff;
    ErrorCode last_code = ErrorCode::network_error;
    std::string last_message;
    for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
      slots_.acquire();
      httplib::Result res = post(body_text);
      slots_.release();
      ++network_calls_;
      if (!res) {
        last_code = ErrorCode::network_error;
        last_message = httplib::to_string(res.error());
        continue;
      }
      const int status = res->status;
      if (status == 200) return extract_content(res->body);
      if (status == 401 || status == 403) throw Error(ErrorCode::auth_error, "HTTP " + std::to_string(status));
      if (status == 429) {
        last_code = ErrorCode::rate_limited;
        last_message = "HTTP 429";
        continue;
      }
      if (status >= 500) {
        last_code = ErrorCode::network_error;
        last_message = "HTTP " + std::to_string(status);
        continue;
      }
      throw Error(ErrorCode::network_error, "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
    }
    throw Error(last_code, last_message + " after " + std::to_string(config_.max_attempts) + " attempts");
  }

  httplib::Result post(const std::string& body_text) {
    httplib::Client cli(endpoint_.scheme_host_port);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    return cli.Post(endpoint_.path, headers, body_text, "application/json");
  }

  static std::string extract_content(const std::string& body) {
    try {
      Json j = Json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw Error(ErrorCode::malformed_response, "content is not a string");
      return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::malformed_response, e.what());
    }
  }

  ModelConfig config_;
  Endpoint endpoint_;
  std::shared_ptr<ResponseCache> cache_;
  CachePolicy policy_;
  std::counting_semaphore<64> slots_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// Backend adapter: routes every task through the chat-completions client.
class LlmBackend final : public Backend {
 public:
  explicit LlmBackend(std::shared_ptr<LlmClient> client) : client_(std::move(client)) {}

  std::string complete(const CompletionRequest& req) override {
    return client_->complete(req.prompt, req.purpose(), req.attempt);
  }
  std::string describe() const override { return "llm(" + client_->config().model_name + ")"; }
  LlmClient& client() { return *client_; }

 private:
  std::shared_ptr<LlmClient> client_;
};

}  // namespace argllm

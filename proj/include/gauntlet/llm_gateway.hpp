#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace gauntlet {

inline constexpr std::string_view kDefaultApiKeyEnv = "GAUNTLET_API_KEY";

struct LlmConfig {
  // Chat-completion API root; requests go to base_url + "/chat/completions".
  std::string base_url;
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 1.0;
  int max_retries = 3;
  std::chrono::milliseconds timeout{60000};
  std::string api_key_env = std::string(kDefaultApiKeyEnv);
  // Delay before retry k (0-based) is initial_backoff * 2^k.
  std::chrono::milliseconds initial_backoff{500};
  int max_concurrency = 4;

  void validate() const;
  static LlmConfig from_json(const nlohmann::json& j);
};

// Anything that can turn a prompt into response text.
class ResponseSource {
 public:
  virtual ~ResponseSource() = default;
  virtual std::string respond(const std::string& prompt) = 0;
};

class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // sleeper defaults to std::this_thread::sleep_for.
  explicit LlmClient(LlmConfig cfg, Sleeper sleeper = {});

  // Text of choices[0].message.content. Retries timeouts, connection
  // failures, 429 and 5xx with exponential backoff; 401/403 fail at once.
  std::string generate(const std::string& prompt) const;

  const LlmConfig& config() const noexcept { return cfg_; }
  std::uint64_t requests_sent() const noexcept { return requests_.load(); }

 private:
  LlmConfig cfg_;
  Sleeper sleeper_;
  mutable std::mutex gate_mu_;
  mutable std::condition_variable gate_cv_;
  mutable int free_slots_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

std::string generate(const LlmConfig& config, const std::string& prompt);

struct CacheEntry {
  std::string key;
  std::string model;
  std::string prompt;
  double temperature = 1.0;
  std::string response_text;
  std::string timestamp;  // UTC, ISO 8601

  std::string to_bytes() const;
  static CacheEntry from_bytes(std::string_view bytes);

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

// SHA-256 of the canonical JSON {"model","prompt","temperature"}.
std::string cache_key(std::string_view model, std::string_view prompt, double temperature);

std::string utc_timestamp();

// Response cache with one JSON file per key under cache_dir. Concurrent misses
// for the same key share a single request. In offline mode a miss is a
// CacheMiss error and no request is ever made.
class CachedGenerator final : public ResponseSource {
 public:
  CachedGenerator(LlmConfig cfg, std::filesystem::path cache_dir, bool offline,
                  LlmClient::Sleeper sleeper = {});

  std::string respond(const std::string& prompt) override;

  std::filesystem::path entry_path(const std::string& key) const;
  const LlmClient& client() const noexcept { return client_; }

 private:
  std::string fetch(const std::string& key, const std::string& prompt);
  bool try_read(const std::string& key, std::string& out) const;

  LlmClient client_;
  std::filesystem::path dir_;
  bool offline_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::string>> inflight_;
};

std::string generate_cached(const LlmConfig& config, const std::filesystem::path& cache_dir,
                            const std::string& prompt);

}  // namespace gauntlet

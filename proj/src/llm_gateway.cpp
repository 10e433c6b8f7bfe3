#include "gauntlet/llm_gateway.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <ctime>
#include <thread>

#include "gauntlet/error.hpp"
#include "gauntlet/hashing.hpp"
#include "gauntlet/http_endpoint.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

void LlmConfig::validate() const {
  parse_http_url(base_url);
  if (model_name.empty()) throw Error(ErrorKind::Config, "llm: model name is empty");
  if (!(temperature >= 0.0)) throw Error(ErrorKind::Config, "llm: temperature must be >= 0");
  if (max_retries < 0 || max_retries > 10) {
    throw Error(ErrorKind::Config, "llm: max_retries must be within 0..10");
  }
  if (timeout.count() <= 0 || initial_backoff.count() < 0 || max_concurrency < 1) {
    throw Error(ErrorKind::Config, "llm: timeout and max_concurrency must be positive");
  }
  if (api_key_env.empty()) throw Error(ErrorKind::Config, "llm: api_key_env is empty");
}

LlmConfig LlmConfig::from_json(const nlohmann::json& j) {
  for (const char* secret : {"api_key", "token", "secret"}) {
    if (j.contains(secret)) {
      throw Error(ErrorKind::Config, std::string("llm config must not carry '") + secret +
                                         "'; name an environment variable in api_key_env");
    }
  }
  LlmConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.model_name = j.value("model", c.model_name);
  c.temperature = j.value("temperature", c.temperature);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.initial_backoff =
      std::chrono::milliseconds(j.value("initial_backoff_ms", c.initial_backoff.count()));
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  return c;
}

LlmClient::LlmClient(LlmConfig cfg, Sleeper sleeper)
    : cfg_(std::move(cfg)), sleeper_(std::move(sleeper)), free_slots_(cfg_.max_concurrency) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (free_slots_ < 1) free_slots_ = 1;
}

namespace {

bool transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::string chat_path(const HttpEndpoint& ep) {
  std::string path = ep.path;
  while (!path.empty() && path.back() == '/') path.pop_back();
  return path + "/chat/completions";
}

}  // namespace

std::string LlmClient::generate(const std::string& prompt) const {
  cfg_.validate();
  const char* key = std::getenv(cfg_.api_key_env.c_str());
  if (!key || !*key) {
    throw Error(ErrorKind::Auth, "API key environment variable " + cfg_.api_key_env + " is not set");
  }
  const HttpEndpoint ep = parse_http_url(cfg_.base_url);
  const std::string path = chat_path(ep);
  const nlohmann::json request = {
      {"model", cfg_.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg_.temperature},
  };
  const std::string body = request.dump();
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  {
    std::unique_lock lock(gate_mu_);
    gate_cv_.wait(lock, [&] { return free_slots_ > 0; });
    --free_slots_;
  }
  struct Release {
    const LlmClient& c;
    ~Release() {
      {
        std::lock_guard lock(c.gate_mu_);
        ++c.free_slots_;
      }
      c.gate_cv_.notify_one();
    }
  } release{*this};

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);

  for (int attempt = 0;; ++attempt) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    ++requests_;
    auto res = client.Post(path, headers, body, "application/json");
    int status = 0;
    std::string failure;
    if (!res) {
      failure = httplib::to_string(res.error());
    } else {
      status = res->status;
      spdlog::info("llm: POST {}{} -> {} (attempt {})", ep.origin, path, status, attempt + 1);
      if (status == 401 || status == 403) {
        throw RemoteError(ErrorKind::Auth, "llm: authentication rejected (HTTP " +
                                               std::to_string(status) + ")",
                          status, excerpt(res->body));
      }
      if (status >= 200 && status < 300) {
        try {
          const auto j = nlohmann::json::parse(res->body);
          return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
          throw RemoteError(ErrorKind::Remote, "llm: malformed chat-completion response", status,
                            excerpt(res->body));
        }
      }
      if (!transient_status(status)) {
        throw RemoteError(ErrorKind::Remote, "llm: HTTP " + std::to_string(status), status,
                          excerpt(res->body));
      }
      failure = "HTTP " + std::to_string(status);
    }

    if (attempt >= cfg_.max_retries) {
      throw RemoteError(ErrorKind::Remote,
                        "llm: retry budget exhausted after " + std::to_string(attempt + 1) +
                            " attempts (last failure: " + failure + ")",
                        status, res ? excerpt(res->body) : std::string());
    }
    const auto delay = cfg_.initial_backoff * (std::int64_t{1} << attempt);
    spdlog::warn("llm: transient failure ({}), retrying in {} ms", failure, delay.count());
    sleeper_(delay);
  }
}

std::string generate(const LlmConfig& config, const std::string& prompt) {
  return LlmClient(config).generate(prompt);
}

std::string CacheEntry::to_bytes() const {
  const nlohmann::ordered_json j = {
      {"key", key},
      {"model", model},
      {"prompt", prompt},
      {"temperature", temperature},
      {"response_text", response_text},
      {"timestamp", timestamp},
  };
  return j.dump(2) + "\n";
}

CacheEntry CacheEntry::from_bytes(std::string_view bytes) {
  try {
    const auto j = nlohmann::json::parse(bytes);
    CacheEntry e;
    e.key = j.at("key").get<std::string>();
    e.model = j.at("model").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.temperature = j.at("temperature").get<double>();
    e.response_text = j.at("response_text").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed cache entry: ") + ex.what());
  }
}

std::string cache_key(std::string_view model, std::string_view prompt, double temperature) {
  const nlohmann::json j = {
      {"model", model},
      {"prompt", prompt},
      {"temperature", temperature},
  };
  return sha256_hex(j.dump());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CachedGenerator::CachedGenerator(LlmConfig cfg, std::filesystem::path cache_dir, bool offline,
                                 LlmClient::Sleeper sleeper)
    : client_(std::move(cfg), std::move(sleeper)), dir_(std::move(cache_dir)), offline_(offline) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create cache directory " + dir_.string());
}

std::filesystem::path CachedGenerator::entry_path(const std::string& key) const {
  return dir_ / (key + ".json");
}

bool CachedGenerator::try_read(const std::string& key, std::string& out) const {
  const auto path = entry_path(key);
  if (!std::filesystem::exists(path)) return false;
  try {
    const CacheEntry e = CacheEntry::from_bytes(serial::read_file(path));
    if (e.key != key) throw Error(ErrorKind::Format, "cache entry key does not match its file name");
    out = e.response_text;
    return true;
  } catch (const Error& err) {
    spdlog::warn("llm cache: ignoring unreadable entry {}: {}", path.string(), err.what());
    return false;
  }
}

std::string CachedGenerator::fetch(const std::string& key, const std::string& prompt) {
  std::string text;
  if (try_read(key, text)) return text;
  if (offline_) {
    throw Error(ErrorKind::CacheMiss, "offline mode: no cached response for key " + key);
  }
  text = client_.generate(prompt);
  CacheEntry e;
  e.key = key;
  e.model = client_.config().model_name;
  e.prompt = prompt;
  e.temperature = client_.config().temperature;
  e.response_text = text;
  e.timestamp = utc_timestamp();
  serial::write_file(entry_path(key), e.to_bytes());
  return text;
}

std::string CachedGenerator::respond(const std::string& prompt) {
  const std::string key =
      cache_key(client_.config().model_name, prompt, client_.config().temperature);

  std::promise<std::string> promise;
  std::shared_future<std::string> future;
  bool leader = false;
  {
    std::lock_guard lock(mu_);
    auto it = inflight_.find(key);
    if (it == inflight_.end()) {
      future = promise.get_future().share();
      inflight_.emplace(key, future);
      leader = true;
    } else {
      future = it->second;
    }
  }
  if (leader) {
    try {
      promise.set_value(fetch(key, prompt));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
    std::lock_guard lock(mu_);
    inflight_.erase(key);
  }
  return future.get();
}

std::string generate_cached(const LlmConfig& config, const std::filesystem::path& cache_dir,
                            const std::string& prompt) {
  CachedGenerator gen(config, cache_dir, false);
  return gen.respond(prompt);
}

}  // namespace gauntlet

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>

#include "gauntlet/detectors.hpp"
#include "gauntlet/error.hpp"
#include "gauntlet/http_endpoint.hpp"

namespace gauntlet {

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

void substitute(nlohmann::json& node, const std::string& text) {
  if (node.is_string()) {
    std::string s = node.get<std::string>();
    std::string out;
    std::size_t pos = 0;
    for (std::size_t hit; (hit = s.find("{text}", pos)) != std::string::npos; pos = hit + 6) {
      out.append(s, pos, hit - pos);
      out += text;
    }
    out.append(s, pos);
    node = std::move(out);
  } else if (node.is_structured()) {
    for (auto& child : node) substitute(child, text);
  }
}

}  // namespace

RemoteDetectorConfig RemoteDetectorConfig::from_json(const nlohmann::json& j) {
  for (const char* secret : {"api_key", "token", "secret", "auth_value", "password"}) {
    if (j.contains(secret)) {
      throw Error(ErrorKind::Config, std::string("remote detector config must not carry '") +
                                         secret + "'; name an environment variable in auth_env");
    }
  }
  RemoteDetectorConfig c;
  if (!j.contains("url") || !j["url"].is_string()) {
    throw Error(ErrorKind::Config, "remote detector needs a \"url\"");
  }
  c.url = j["url"].get<std::string>();
  parse_http_url(c.url);
  c.id = j.value("id", c.id);
  c.auth_header = j.value("auth_header", c.auth_header);
  c.auth_env = j.value("auth_env", c.auth_env);
  c.auth_prefix = j.value("auth_prefix", c.auth_prefix);
  if (j.contains("request_template")) c.request_template = j["request_template"];
  c.response_field = j.value("response_field", c.response_field);
  c.ai_threshold = j.value("ai_threshold", c.ai_threshold);
  c.human_threshold = j.value("human_threshold", std::min(c.human_threshold, c.ai_threshold));
  c.score_scale = j.value("score_scale", c.score_scale);
  if (j.contains("labels")) {
    c.label_map.clear();
    for (const auto& [k, v] : j["labels"].items()) {
      c.label_map[lower(k)] = parse_verdict(v.get<std::string>());
    }
  }
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  if (c.human_threshold > c.ai_threshold) {
    throw Error(ErrorKind::Config, "remote detector: human_threshold must not exceed ai_threshold");
  }
  if (!(c.score_scale > 0.0) || c.max_concurrency < 1 || c.timeout.count() <= 0) {
    throw Error(ErrorKind::Config,
                "remote detector: score_scale, max_concurrency and timeout_ms must be positive");
  }
  if (c.auth_header.empty() != c.auth_env.empty()) {
    throw Error(ErrorKind::Config, "remote detector: auth_header and auth_env go together");
  }
  return c;
}

DetectionResult map_remote_response(const RemoteDetectorConfig& cfg, int status,
                                    const std::string& body) {
  auto fail = [&](const std::string& why) {
    return RemoteError(ErrorKind::Remote, "remote detector '" + cfg.id + "': " + why, status,
                       excerpt(body));
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw fail("response is not JSON");
  }
  nlohmann::json field;
  try {
    field = j.at(nlohmann::json::json_pointer(cfg.response_field));
  } catch (const nlohmann::json::exception&) {
    throw fail("response has no field " + cfg.response_field);
  }

  DetectionResult r;
  r.detector_id = cfg.id;
  if (field.is_number()) {
    const double s = field.get<double>() / cfg.score_scale;
    if (s > cfg.ai_threshold) {
      r.verdict = Verdict::AI;
    } else if (s < cfg.human_threshold) {
      r.verdict = Verdict::Human;
    } else {
      r.verdict = Verdict::Tie;
    }
    if (s >= 0.0 && s <= 1.0) r.ai_probability = s;
    return r;
  }
  if (field.is_boolean()) {
    r.verdict = field.get<bool>() ? Verdict::AI : Verdict::Human;
    return r;
  }
  if (field.is_string()) {
    const auto it = cfg.label_map.find(lower(field.get<std::string>()));
    if (it == cfg.label_map.end()) throw fail("unmapped label '" + field.get<std::string>() + "'");
    r.verdict = it->second;
    return r;
  }
  throw fail("field " + cfg.response_field + " is neither number, boolean nor string");
}

DetectionResult detect_remote(const RemoteDetectorConfig& cfg, const Document& doc) {
  const HttpEndpoint ep = parse_http_url(cfg.url);
  nlohmann::json body = cfg.request_template;
  substitute(body, doc.text);

  httplib::Headers headers;
  if (!cfg.auth_header.empty()) {
    const char* secret = std::getenv(cfg.auth_env.c_str());
    if (!secret || !*secret) {
      throw Error(ErrorKind::Auth, "environment variable " + cfg.auth_env + " is not set");
    }
    headers.emplace(cfg.auth_header, cfg.auth_prefix + secret);
  }

  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(ep.path, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;

  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= cfg.timeout);
    spdlog::warn("remote detector {}: POST {} failed: {}", cfg.id, cfg.url, httplib::to_string(err));
    throw RemoteError(timed_out ? ErrorKind::Timeout : ErrorKind::Remote,
                      "remote detector '" + cfg.id + "': " +
                          (timed_out ? std::string("timed out") : httplib::to_string(err)),
                      0, "");
  }
  spdlog::info("remote detector {}: POST {} -> {}", cfg.id, cfg.url, res->status);
  if (res->status < 200 || res->status >= 300) {
    throw RemoteError(ErrorKind::Remote,
                      "remote detector '" + cfg.id + "': HTTP " + std::to_string(res->status),
                      res->status, excerpt(res->body));
  }
  return map_remote_response(cfg, res->status, res->body);
}

struct RemoteDetector::Gate {
  std::mutex mu;
  std::condition_variable cv;
  int free_slots;
};

RemoteDetector::RemoteDetector(RemoteDetectorConfig cfg)
    : cfg_(std::move(cfg)), gate_(std::make_unique<Gate>()) {
  gate_->free_slots = std::max(1, cfg_.max_concurrency);
}

RemoteDetector::~RemoteDetector() = default;

DetectionResult RemoteDetector::detect(const Document& doc) const {
  {
    std::unique_lock lock(gate_->mu);
    gate_->cv.wait(lock, [&] { return gate_->free_slots > 0; });
    --gate_->free_slots;
  }
  struct Release {
    Gate& g;
    ~Release() {
      {
        std::lock_guard lock(g.mu);
        ++g.free_slots;
      }
      g.cv.notify_one();
    }
  } release{*gate_};
  return detect_remote(cfg_, doc);
}

}  // namespace gauntlet

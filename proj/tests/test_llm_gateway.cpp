#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "gauntlet/error.hpp"
#include "gauntlet/llm_gateway.hpp"
#include "gauntlet/serial.hpp"
#include "support/stub_server.hpp"

using namespace gauntlet;
namespace fs = std::filesystem;

namespace {

constexpr const char* kKeyEnv = "GAUNTLET_TEST_LLM_KEY";
constexpr const char* kKey = "sk-test-secret-value";

std::string completion(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}
      .dump();
}

class Gateway : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv(kKeyEnv, kKey, 1);
    dir_ = fs::temp_directory_path() /
           ("gauntlet-llm-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    stub_.server().Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
      const int n = ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (n <= fail_first_) {
        res.status = fail_status_;
        res.set_content(R"({"error":"try later"})", "application/json");
        return;
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      const auto body = nlohmann::json::parse(req.body);
      res.set_content(completion("echo: " + body["messages"][0]["content"].get<std::string>()),
                      "application/json");
    });
    stub_.server().Post("/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"choices":[]})", "application/json");
    });
    stub_.start();
  }
  void TearDown() override {
    stub_.stop();
    fs::remove_all(dir_);
  }

  LlmConfig config() const {
    LlmConfig c;
    c.base_url = stub_.url("/v1");
    c.api_key_env = kKeyEnv;
    c.initial_backoff = std::chrono::milliseconds(10);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
  }

  StubServer stub_;
  std::atomic<int> hits_{0};
  int fail_first_ = 0;
  int fail_status_ = 429;
  int delay_ms_ = 0;
  std::string last_auth_;
  std::string last_body_;
  fs::path dir_;
};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_F(Gateway, ReturnsCompletionText) {
  EXPECT_EQ(generate(config(), "hi"), "echo: hi");
  EXPECT_EQ(last_auth_, std::string("Bearer ") + kKey);
  const auto body = nlohmann::json::parse(last_body_);
  EXPECT_EQ(body["model"], "gpt-3.5-turbo");
  EXPECT_EQ(body["temperature"], 1.0);
  EXPECT_EQ(body["messages"][0]["role"], "user");
}

TEST_F(Gateway, RetriesRateLimitWithGrowingBackoff) {
  fail_first_ = 2;
  std::vector<std::chrono::milliseconds> delays;
  LlmClient client(config(), [&](std::chrono::milliseconds d) { delays.push_back(d); });
  EXPECT_EQ(client.generate("x"), "echo: x");
  EXPECT_EQ(hits_, 3);
  EXPECT_EQ(client.requests_sent(), 3u);
  ASSERT_EQ(delays.size(), 2u);
  EXPECT_GT(delays[0].count(), 0);
  EXPECT_LE(delays[0], delays[1]);
}

TEST_F(Gateway, RetriesServerErrorsUntilBudgetExhausted) {
  fail_first_ = 100;
  fail_status_ = 503;
  LlmConfig c = config();
  c.max_retries = 2;
  LlmClient client(c, [](std::chrono::milliseconds) {});
  try {
    client.generate("x");
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Remote);
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(hits_, 3);
}

TEST_F(Gateway, AuthRejectionIsNotRetried) {
  fail_first_ = 100;
  fail_status_ = 401;
  LlmClient client(config(), [](std::chrono::milliseconds) {});
  EXPECT_EQ(kind_of([&] { client.generate("x"); }), ErrorKind::Auth);
  EXPECT_EQ(hits_, 1);
}

TEST_F(Gateway, MissingKeyFailsBeforeAnyRequest) {
  LlmConfig c = config();
  c.api_key_env = "GAUNTLET_TEST_UNSET_KEY";
  ::unsetenv("GAUNTLET_TEST_UNSET_KEY");
  EXPECT_EQ(kind_of([&] { generate(c, "x"); }), ErrorKind::Auth);
  EXPECT_EQ(hits_, 0);
}

TEST_F(Gateway, MalformedResponseIsRemoteError) {
  LlmConfig c = config();
  c.base_url = stub_.url("/bad");
  EXPECT_EQ(kind_of([&] { generate(c, "x"); }), ErrorKind::Remote);
}

TEST_F(Gateway, CacheHitAvoidsNetwork) {
  CachedGenerator gen(config(), dir_, false);
  EXPECT_EQ(gen.respond("same"), "echo: same");
  EXPECT_EQ(gen.respond("same"), "echo: same");
  EXPECT_EQ(hits_, 1);
  CachedGenerator again(config(), dir_, true);
  EXPECT_EQ(again.respond("same"), "echo: same");
  EXPECT_EQ(hits_, 1);
}

TEST_F(Gateway, TemperatureIsPartOfTheKey) {
  LlmConfig hot = config();
  LlmConfig cold = config();
  cold.temperature = 0.0;
  EXPECT_NE(cache_key(hot.model_name, "p", hot.temperature),
            cache_key(cold.model_name, "p", cold.temperature));
  CachedGenerator a(hot, dir_, false);
  CachedGenerator b(cold, dir_, false);
  a.respond("p");
  b.respond("p");
  EXPECT_EQ(hits_, 2);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_)) files += e.path().extension() == ".json";
  EXPECT_EQ(files, 2u);
}

TEST_F(Gateway, CorruptEntryIsRewritten) {
  CachedGenerator gen(config(), dir_, false);
  const std::string key = cache_key(config().model_name, "p", config().temperature);
  fs::create_directories(dir_);
  serial::write_file(gen.entry_path(key), "{ not json");
  EXPECT_EQ(gen.respond("p"), "echo: p");
  EXPECT_EQ(hits_, 1);
  const CacheEntry e = CacheEntry::from_bytes(serial::read_file(gen.entry_path(key)));
  EXPECT_EQ(e.response_text, "echo: p");
  EXPECT_EQ(e.key, key);
}

TEST_F(Gateway, OfflineMissIsError) {
  CachedGenerator gen(config(), dir_, true);
  EXPECT_EQ(kind_of([&] { gen.respond("cold"); }), ErrorKind::CacheMiss);
  EXPECT_EQ(hits_, 0);
}

TEST_F(Gateway, ConcurrentMissesShareOneRequest) {
  delay_ms_ = 200;
  CachedGenerator gen(config(), dir_, false);
  std::vector<std::string> out(16);
  {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < out.size(); ++i) {
      threads.emplace_back([&, i] { out[i] = gen.respond("shared"); });
    }
  }
  for (const auto& s : out) EXPECT_EQ(s, "echo: shared");
  EXPECT_EQ(hits_, 1);
}

TEST_F(Gateway, SecretNeverReachesCacheFiles) {
  CachedGenerator gen(config(), dir_, false);
  gen.respond("p");
  for (const auto& e : fs::directory_iterator(dir_)) {
    EXPECT_EQ(serial::read_file(e.path()).find(kKey), std::string::npos);
  }
}

TEST(CacheEntry, ByteRoundTrip) {
  CacheEntry e{"k", "m", "prompt\nwith \"quotes\" and é", 0.7, "answer", "2026-01-01T00:00:00Z"};
  const std::string bytes = e.to_bytes();
  EXPECT_EQ(CacheEntry::from_bytes(bytes).to_bytes(), bytes);
  EXPECT_THROW(CacheEntry::from_bytes("[]"), Error);
}

TEST(LlmConfig, RejectsSecretsAndBadValues) {
  EXPECT_THROW(LlmConfig::from_json({{"api_key", "x"}}), Error);
  LlmConfig c;
  c.base_url = "ftp://example.com";
  EXPECT_THROW(c.validate(), Error);
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_retries = 11;
  EXPECT_THROW(c.validate(), Error);
  const LlmConfig parsed = LlmConfig::from_json(
      {{"base_url", "http://h/v1"}, {"model", "m"}, {"temperature", 0.2}, {"timeout_ms", 1500}});
  EXPECT_EQ(parsed.model_name, "m");
  EXPECT_EQ(parsed.timeout, std::chrono::milliseconds(1500));
}

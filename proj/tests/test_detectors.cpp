#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <thread>

#include "gauntlet/desk_corpus.hpp"
#include "gauntlet/detectors.hpp"
#include "gauntlet/error.hpp"
#include "gauntlet/ngram_lm.hpp"
#include "gauntlet/perturb.hpp"
#include "support/stub_server.hpp"

using namespace gauntlet;
namespace fs = std::filesystem;

namespace {

Document ai(std::string text, std::string id = "a") {
  return {std::move(id), "", std::move(text), Origin::AiGenerated};
}
Document human(std::string text, std::string id = "h") {
  return {std::move(id), "", std::move(text), Origin::HumanWritten};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

std::shared_ptr<const NgramModel> clean_lm() {
  static const auto m = std::make_shared<NgramModel>(
      NgramModel::train(desk::clean_corpus(100'000, 51), 4, 0.1, TokenMode::Char));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Perplexity detector

TEST(PerplexityVerdict, Examples) {
  const PerplexityThresholds th{10, 2};
  EXPECT_EQ(verdict_for_scores(5, 0.5, th), Verdict::AI);
  EXPECT_EQ(verdict_for_scores(50, 9, th), Verdict::Human);
  EXPECT_EQ(verdict_for_scores(50, 0.5, th), Verdict::Tie);
  EXPECT_EQ(verdict_for_scores(5, 9, th), Verdict::Tie);
  EXPECT_EQ(verdict_for_scores(10, 2, th), Verdict::Human);
}

TEST(PerplexityVerdict, ExhaustiveGrid) {
  const PerplexityThresholds th{4.0, 1.5};
  for (int i = 0; i <= 80; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double p = 1.0 + 0.1 * i;
      const double b = 0.1 * j;
      const bool low_p = p < th.ppl_cut;
      const bool low_b = b < th.burst_cut;
      const Verdict want = low_p && low_b ? Verdict::AI : !low_p && !low_b ? Verdict::Human : Verdict::Tie;
      ASSERT_EQ(verdict_for_scores(p, b, th), want) << p << " " << b;
    }
  }
}

TEST(Calibration, MidpointOfMedians) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  const auto lm = clean_lm();
  const Document a = ai(desk::ai_like_documents(1, 1)[0].text);
  const Document h = human(desk::human_like_documents(1, 2)[0].text);
  const PerplexityThresholds th = calibrate_thresholds(*lm, std::vector<Document>{a, h});
  EXPECT_DOUBLE_EQ(th.ppl_cut, (perplexity(*lm, a.text) + perplexity(*lm, h.text)) / 2);
  EXPECT_DOUBLE_EQ(th.burst_cut, (burstiness(*lm, a.text) + burstiness(*lm, h.text)) / 2);
}

TEST(Calibration, MissingClassIsError) {
  const auto lm = clean_lm();
  const std::vector<Document> only_ai = {ai("One sentence. Another one."), ai("Third. Fourth.")};
  EXPECT_EQ(kind_of([&] { calibrate_thresholds(*lm, only_ai); }), ErrorKind::Calibration);
}

TEST(PerplexityDetector, CleanTextBelowCutsIsAI) {
  const auto lm = clean_lm();
  const Document d = ai(desk::ai_like_documents(1, 3)[0].text);
  const PerplexityDetector det("ppl", lm, {1e6, 1e6});
  const DetectionResult r = det.detect(d);
  EXPECT_EQ(r.verdict, Verdict::AI);
  EXPECT_EQ(r.detector_id, "ppl");
  ASSERT_TRUE(r.perplexity && r.burstiness);
  EXPECT_FALSE(r.ai_probability);
  EXPECT_EQ(kind_of([&] { det.detect(ai("  \n ")); }), ErrorKind::DegenerateInput);
  EXPECT_EQ(kind_of([&] { PerplexityDetector("x", lm, {0.5, 1}); }), ErrorKind::Config);
}

// ---------------------------------------------------------------------------
// Classifier

TEST(Featurize, SingleBigram) {
  const SparseVector v = featurize("ab", {2, 2}, 1u << 18);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v[0].second, 1.0);
  EXPECT_EQ(v[0].first, feature_bucket("ab", 1u << 18));
}

TEST(Featurize, SpaceCommaBucketAppearsOnlyAfterEdit) {
  const std::string clean = "Power grows, and so does demand.";
  const std::string edited = space_infi(clean, 0).text;
  const std::uint32_t dim = 1u << 18;
  const std::uint32_t bucket = feature_bucket(" ,", dim);
  auto value = [&](const SparseVector& v) {
    for (const auto& [b, x] : v) {
      if (b == bucket) return x;
    }
    return 0.0;
  };
  EXPECT_EQ(value(featurize(clean, {1, 4}, dim)), 0.0);
  EXPECT_GT(value(featurize(edited, {1, 4}, dim)), 0.0);
}

TEST(Featurize, NormalizedSortedAndDeterministic) {
  const std::string t = "The same text, twice over.";
  const SparseVector a = featurize(t, {1, 4}, 1u << 12);
  EXPECT_EQ(a, featurize(t, {1, 4}, 1u << 12));
  double norm = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    norm += a[i].second * a[i].second;
    if (i > 0) ASSERT_LT(a[i - 1].first, a[i].first);
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_TRUE(featurize("", {1, 4}, 1u << 12).empty());
  // FNV-1a 64 of "a" is fixed across platforms and processes
  EXPECT_EQ(feature_bucket("a", 1u << 18), 0xaf63dc4c8601ec8cULL & ((1u << 18) - 1));
}

TEST(Classifier, ZeroInitIsUndecided) {
  ClassifierConfig cfg;
  cfg.epochs = 0;
  const std::vector<Document> docs = {ai("aaaa"), human("bbbb")};
  const ClassifierModel m = train_classifier(docs, cfg);
  EXPECT_DOUBLE_EQ(m.ai_probability("anything at all"), 0.5);
  EXPECT_EQ(verdict_for_probability(0.5, 0.0), Verdict::Tie);
}

TEST(Classifier, SeparableToyReachesFullAccuracy) {
  ClassifierConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 500;
  const std::vector<Document> docs = {ai("aaaa"), human("bbbb")};
  std::vector<double> losses;
  const ClassifierModel m = train_classifier(docs, cfg, &losses);
  EXPECT_EQ(detect_classifier(m, docs[0]).verdict, Verdict::AI);
  EXPECT_EQ(detect_classifier(m, docs[1]).verdict, Verdict::Human);

  // reference gradient descent: the two documents share no n-gram and their
  // feature vectors have unit norm, so each weight vector stays a multiple s
  // of its document's features and the logit is bias + s
  double sa = 0, sb = 0, b = 0;
  auto sig = [](double z) { return 1 / (1 + std::exp(-z)); };
  for (int e = 0; e < 500; ++e) {
    const double ga = sig(b + sa) - 1;
    const double gb = sig(b + sb);
    sa -= 0.5 * 0.5 * ga;
    sb -= 0.5 * 0.5 * gb;
    b -= 0.5 * 0.5 * (ga + gb);
  }
  EXPECT_NEAR(m.ai_probability("aaaa"), sig(b + sa), 1e-9);
  EXPECT_NEAR(m.ai_probability("bbbb"), sig(b + sb), 1e-9);
  EXPECT_EQ(losses.size(), 501u);
}

TEST(Classifier, LossNonIncreasingAtDefaultRate) {
  std::vector<Document> docs = desk::ai_like_documents(60, 5);
  for (const auto& d : desk::human_like_documents(60, 6)) docs.push_back(d);
  std::vector<double> losses;
  train_classifier(docs, ClassifierConfig{}, &losses);
  ASSERT_EQ(losses.size(), 201u);
  EXPECT_NEAR(losses.front(), std::log(2.0), 1e-12);
  for (std::size_t i = 1; i < losses.size(); ++i) ASSERT_LE(losses[i], losses[i - 1] + 1e-15);
}

TEST(Classifier, SpaceCommaWeightPushesTowardHuman) {
  std::vector<Document> docs = desk::ai_like_documents(200, 7);
  for (const auto& d : desk::human_like_documents(200, 8)) docs.push_back(d);
  ClassifierConfig cfg;
  cfg.learning_rate = 5.0;
  cfg.epochs = 1000;
  cfg.ngram_range = {2, 3};
  const ClassifierModel m = train_classifier(docs, cfg);
  EXPECT_LT(m.weights.at(feature_bucket(" ,", cfg.feature_dim)), 0.0);
}

TEST(Classifier, OneClassInputIsTrainingError) {
  const std::vector<Document> docs = {ai("aaaa"), ai("abab")};
  EXPECT_EQ(kind_of([&] { train_classifier(docs, ClassifierConfig{}); }), ErrorKind::Training);
}

TEST(Classifier, BadHyperparametersAreConfigErrors) {
  const std::vector<Document> docs = {ai("aaaa"), human("bbbb")};
  ClassifierConfig cfg;
  cfg.learning_rate = INFINITY;
  EXPECT_EQ(kind_of([&] { train_classifier(docs, cfg); }), ErrorKind::Config);
  cfg = {};
  cfg.feature_dim = 1000;
  EXPECT_EQ(kind_of([&] { train_classifier(docs, cfg); }), ErrorKind::Config);
  cfg = {};
  cfg.ngram_range = {3, 2};
  EXPECT_EQ(kind_of([&] { train_classifier(docs, cfg); }), ErrorKind::Config);
}

TEST(Classifier, VerdictBands) {
  EXPECT_EQ(verdict_for_probability(0.9, 0.05), Verdict::AI);
  EXPECT_EQ(verdict_for_probability(0.5, 0.01), Verdict::Tie);
  EXPECT_EQ(verdict_for_probability(0.2, 0.05), Verdict::Human);
  EXPECT_EQ(verdict_for_probability(0.53, 0.05), Verdict::Tie);
}

TEST(Classifier, SaveLoadAndPurity) {
  ClassifierConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 50;
  cfg.feature_dim = 1u << 10;
  const std::vector<Document> docs = {ai("aaaa"), human("bbbb")};
  const ClassifierModel m = train_classifier(docs, cfg);
  const fs::path path = fs::temp_directory_path() / ("gauntlet-clf-" + std::to_string(::getpid()));
  m.save(path);
  const ClassifierModel back = ClassifierModel::load(path);
  fs::remove(path);
  EXPECT_EQ(back.serialize(), m.serialize());
  const Document probe = ai("abba");
  const Document copy = probe;
  EXPECT_EQ(detect_classifier(back, probe).ai_probability, detect_classifier(m, copy).ai_probability);
  std::string bytes = m.serialize();
  EXPECT_EQ(kind_of([&] { ClassifierModel::deserialize(bytes.substr(0, bytes.size() - 3)); }),
            ErrorKind::Format);
}

// ---------------------------------------------------------------------------
// Remote detector

TEST(RemoteMapping, NumberBooleanAndLabel) {
  RemoteDetectorConfig cfg;
  EXPECT_EQ(map_remote_response(cfg, 200, R"({"ai_score":0.99})").verdict, Verdict::AI);
  EXPECT_EQ(map_remote_response(cfg, 200, R"({"ai_score":0.01})").verdict, Verdict::Human);
  cfg.response_field = "/result/is_ai";
  EXPECT_EQ(map_remote_response(cfg, 200, R"({"result":{"is_ai":false}})").verdict, Verdict::Human);
  cfg.response_field = "/label";
  EXPECT_EQ(map_remote_response(cfg, 200, R"({"label":"Human"})").verdict, Verdict::Human);
  EXPECT_THROW(map_remote_response(cfg, 200, R"({"label":"maybe"})"), RemoteError);
  EXPECT_THROW(map_remote_response(cfg, 200, R"({"other":1})"), RemoteError);
  EXPECT_THROW(map_remote_response(cfg, 200, "not json"), RemoteError);
}

TEST(RemoteConfig, RejectsInlineSecrets) {
  const nlohmann::json j = {{"url", "http://127.0.0.1:1/x"}, {"api_key", "sk-live"}};
  EXPECT_EQ(kind_of([&] { RemoteDetectorConfig::from_json(j); }), ErrorKind::Config);
}

TEST(RemoteDetector, StubScoresAndErrors) {
  StubServer stub;
  std::atomic<int> hits{0};
  std::string last_auth;
  stub.server().Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    last_auth = req.get_header_value("X-Key");
    const auto body = nlohmann::json::parse(req.body);
    const double score = body["text"].get<std::string>().find(" ,") != std::string::npos ? 0.1 : 0.99;
    res.set_content(nlohmann::json{{"ai_score", score}}.dump(), "application/json");
  });
  stub.server().Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("internal trouble", "text/plain");
  });
  stub.server().Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"ai_score":0.9})", "application/json");
  });
  stub.start();
  ::setenv("GAUNTLET_TEST_DETECTOR_KEY", "k-123", 1);

  RemoteDetectorConfig cfg;
  cfg.id = "stub";
  cfg.url = stub.url("/score");
  cfg.auth_header = "X-Key";
  cfg.auth_env = "GAUNTLET_TEST_DETECTOR_KEY";
  const RemoteDetector det(cfg);
  const DetectionResult r = det.detect(ai("Clean text, as generated."));
  EXPECT_EQ(r.verdict, Verdict::AI);
  EXPECT_EQ(r.detector_id, "stub");
  EXPECT_NEAR(r.ai_probability.value(), 0.99, 1e-12);
  EXPECT_EQ(last_auth, "k-123");
  EXPECT_EQ(det.detect(ai("Edited text , as generated.")).verdict, Verdict::Human);

  cfg.url = stub.url("/broken");
  try {
    detect_remote(cfg, ai("x"));
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Remote);
    EXPECT_EQ(e.status(), 500);
    EXPECT_EQ(e.body_excerpt(), "internal trouble");
  }

  cfg.url = stub.url("/slow");
  cfg.timeout = std::chrono::milliseconds(200);
  EXPECT_EQ(kind_of([&] { detect_remote(cfg, ai("x")); }), ErrorKind::Timeout);
  stub.stop();
}

TEST(RemoteDetector, UnreachableIsRemoteError) {
  RemoteDetectorConfig cfg;
  cfg.url = "http://127.0.0.1:1/score";
  cfg.timeout = std::chrono::milliseconds(500);
  const ErrorKind k = kind_of([&] { detect_remote(cfg, ai("x")); });
  EXPECT_TRUE(k == ErrorKind::Remote || k == ErrorKind::Timeout);
}

TEST(MakeDetector, BuildsFromSpecs) {
  const fs::path dir = fs::temp_directory_path() / ("gauntlet-mk-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  clean_lm()->save(dir / "lm.bin");
  const auto ppl = make_detector({{"type", "perplexity"}, {"model", "lm.bin"}, {"ppl_cut", 5.0},
                                  {"burst_cut", 1.0}},
                                 dir);
  EXPECT_EQ(ppl->id(), "perplexity");
  EXPECT_EQ(kind_of([&] { make_detector({{"type", "perplexity"}, {"model", "nope.bin"},
                                         {"ppl_cut", 5.0}, {"burst_cut", 1.0}},
                                        dir); }),
            ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { make_detector({{"type", "oracle"}}, dir); }), ErrorKind::Config);
  const auto remote = make_detector({{"type", "remote"}, {"id", "svc"}, {"url", "http://127.0.0.1:1/"}}, dir);
  EXPECT_EQ(remote->id(), "svc");
  fs::remove_all(dir);
}

TEST(DetectionResult, JsonShape) {
  DetectionResult r;
  r.detector_id = "d";
  r.verdict = Verdict::Tie;
  r.perplexity = 3.5;
  const auto j = to_json(r);
  EXPECT_EQ(j["verdict"], "Tie");
  EXPECT_EQ(j["perplexity"], 3.5);
  EXPECT_TRUE(j["ai_probability"].is_null());
  EXPECT_EQ(parse_verdict("human"), Verdict::Human);
}

TEST(MakeDetector, MistypedFieldIsConfigError) {
  const fs::path dir = fs::temp_directory_path() / ("gauntlet-mk2-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  clean_lm()->save(dir / "lm.bin");
  EXPECT_EQ(kind_of([&] { make_detector({{"type", "perplexity"}, {"model", "lm.bin"},
                                         {"ppl_cut", "high"}, {"burst_cut", 1.0}},
                                        dir); }),
            ErrorKind::Config);
  fs::remove_all(dir);
}

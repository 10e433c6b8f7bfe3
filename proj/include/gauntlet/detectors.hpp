#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gauntlet/ngram_lm.hpp"
#include "gauntlet/text_core.hpp"

namespace gauntlet {

enum class Verdict { AI, Human, Tie };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view name);

struct DetectionResult {
  Verdict verdict = Verdict::Tie;
  std::optional<double> perplexity;
  std::optional<double> burstiness;
  std::optional<double> ai_probability;
  std::string detector_id;
};

nlohmann::json to_json(const DetectionResult& r);

// The one interface the evaluation harness talks to.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual const std::string& id() const = 0;
  virtual DetectionResult detect(const Document& doc) const = 0;
};

// ---------------------------------------------------------------------------
// Perplexity / burstiness detector

struct PerplexityThresholds {
  double ppl_cut = 0.0;
  double burst_cut = 0.0;
};

// AI when both scores are under their cuts, Human when both are at or above,
// Tie when exactly one crosses.
Verdict verdict_for_scores(double perplexity, double burstiness,
                           const PerplexityThresholds& th);

DetectionResult detect_perplexity(const NgramModel& model, const PerplexityThresholds& th,
                                  const Document& doc);

// Each cut is the midpoint of the AI median and the human median. Documents
// of origin Unknown are ignored.
PerplexityThresholds calibrate_thresholds(const NgramModel& model,
                                          std::span<const Document> labeled);

double median(std::vector<double> values);

class PerplexityDetector final : public Detector {
 public:
  PerplexityDetector(std::string id, std::shared_ptr<const NgramModel> model,
                     PerplexityThresholds th);

  const std::string& id() const override { return id_; }
  DetectionResult detect(const Document& doc) const override;

  const PerplexityThresholds& thresholds() const noexcept { return th_; }
  const NgramModel& model() const noexcept { return *model_; }

 private:
  std::string id_;
  std::shared_ptr<const NgramModel> model_;
  PerplexityThresholds th_;
};

// ---------------------------------------------------------------------------
// Hashed character n-gram logistic classifier

struct NgramRange {
  int min = 1;
  int max = 4;
};

// (bucket, value) pairs sorted by bucket, no duplicates.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Bucket of one n-gram: fnv1a64(utf8 bytes) mod feature_dim.
std::uint32_t feature_bucket(std::string_view ngram, std::uint32_t feature_dim);

// L2-normalized counts of every character n-gram with length in range.
SparseVector featurize(std::string_view text, NgramRange range, std::uint32_t feature_dim);

struct ClassifierModel {
  std::uint32_t feature_dim = 1u << 18;
  std::vector<double> weights;
  double bias = 0.0;
  NgramRange ngram_range;
  double tie_band = 0.0;

  double ai_probability(std::string_view text) const;
  double logit(const SparseVector& x) const;

  void save(const std::filesystem::path& path) const;
  static ClassifierModel load(const std::filesystem::path& path);
  std::string serialize() const;
  static ClassifierModel deserialize(std::string_view bytes);
};

struct ClassifierConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  NgramRange ngram_range;
  std::uint32_t feature_dim = 1u << 18;
  double tie_band = 0.0;
  std::uint64_t seed = 0;
};

// Full-batch gradient descent on mean cross-entropy from zero weights, AI
// labelled 1. When losses is given it receives epochs + 1 values: the loss at
// initialization and after each epoch.
ClassifierModel train_classifier(std::span<const Document> labeled,
                                 const ClassifierConfig& config,
                                 std::vector<double>* losses = nullptr);

Verdict verdict_for_probability(double p, double tie_band);
DetectionResult detect_classifier(const ClassifierModel& model, const Document& doc,
                                  std::string detector_id = "classifier");

class ClassifierDetector final : public Detector {
 public:
  ClassifierDetector(std::string id, std::shared_ptr<const ClassifierModel> model);

  const std::string& id() const override { return id_; }
  DetectionResult detect(const Document& doc) const override;

 private:
  std::string id_;
  std::shared_ptr<const ClassifierModel> model_;
};

// ---------------------------------------------------------------------------
// Remote HTTP detector

struct RemoteDetectorConfig {
  std::string id = "remote";
  std::string url;
  // Header carrying the secret, e.g. "Authorization". The value is read from
  // auth_env at call time; both empty means no auth.
  std::string auth_header;
  std::string auth_env;
  std::string auth_prefix;  // e.g. "Bearer "
  // Request body; every string containing "{text}" has it replaced by the
  // document text.
  nlohmann::json request_template = {{"text", "{text}"}};
  // JSON pointer into the response, e.g. "/ai_score" or "/result/label".
  std::string response_field = "/ai_score";
  // Numeric fields: value / score_scale > ai_threshold is AI, below
  // human_threshold is Human, otherwise Tie.
  double ai_threshold = 0.5;
  double human_threshold = 0.5;
  double score_scale = 1.0;
  // String fields are looked up case-insensitively; booleans mean "is AI".
  std::map<std::string, Verdict> label_map = {
      {"ai", Verdict::AI}, {"human", Verdict::Human}, {"tie", Verdict::Tie}};
  std::chrono::milliseconds timeout{10000};
  int max_concurrency = 4;

  static RemoteDetectorConfig from_json(const nlohmann::json& j);
};

// Maps a raw response body to a result; throws RemoteError when
// the configured field is missing or unmappable.
DetectionResult map_remote_response(const RemoteDetectorConfig& cfg, int status,
                                    const std::string& body);

DetectionResult detect_remote(const RemoteDetectorConfig& cfg, const Document& doc);

class RemoteDetector final : public Detector {
 public:
  explicit RemoteDetector(RemoteDetectorConfig cfg);
  ~RemoteDetector() override;

  const std::string& id() const override { return cfg_.id; }
  DetectionResult detect(const Document& doc) const override;

 private:
  struct Gate;
  RemoteDetectorConfig cfg_;
  std::unique_ptr<Gate> gate_;
};

// Builds a detector from its JSON spec ("type": perplexity | classifier |
// remote). Relative paths resolve against base_dir.
std::shared_ptr<const Detector> make_detector(const nlohmann::json& spec,
                                              const std::filesystem::path& base_dir);

}  // namespace gauntlet

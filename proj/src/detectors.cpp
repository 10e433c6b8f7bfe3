#include "gauntlet/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gauntlet/corpus_io.hpp"
#include "gauntlet/error.hpp"

namespace gauntlet {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::AI: return "AI";
    case Verdict::Human: return "Human";
    case Verdict::Tie: return "Tie";
  }
  return "Tie";
}

Verdict parse_verdict(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "ai") return Verdict::AI;
  if (key == "human") return Verdict::Human;
  if (key == "tie") return Verdict::Tie;
  throw Error(ErrorKind::Data, "unknown verdict '" + std::string(name) + "'");
}

nlohmann::json to_json(const DetectionResult& r) {
  nlohmann::json j;
  j["detector"] = r.detector_id;
  j["verdict"] = std::string(to_string(r.verdict));
  j["perplexity"] = r.perplexity ? nlohmann::json(*r.perplexity) : nlohmann::json(nullptr);
  j["burstiness"] = r.burstiness ? nlohmann::json(*r.burstiness) : nlohmann::json(nullptr);
  j["ai_probability"] =
      r.ai_probability ? nlohmann::json(*r.ai_probability) : nlohmann::json(nullptr);
  return j;
}

Verdict verdict_for_scores(double perplexity, double burstiness,
                           const PerplexityThresholds& th) {
  const bool ppl_high = perplexity >= th.ppl_cut;
  const bool burst_high = burstiness >= th.burst_cut;
  if (ppl_high && burst_high) return Verdict::Human;
  if (!ppl_high && !burst_high) return Verdict::AI;
  return Verdict::Tie;
}

DetectionResult detect_perplexity(const NgramModel& model, const PerplexityThresholds& th,
                                  const Document& doc) {
  if (trim_whitespace(doc.text).empty()) {
    throw Error(ErrorKind::DegenerateInput, "document '" + doc.id + "' has no text to score");
  }
  DetectionResult r;
  const double ppl = perplexity(model, doc.text);
  const double burst = burstiness(model, doc.text);
  r.verdict = verdict_for_scores(ppl, burst, th);
  r.perplexity = ppl;
  r.burstiness = burst;
  r.detector_id = "perplexity";
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::Calibration, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

PerplexityThresholds calibrate_thresholds(const NgramModel& model,
                                          std::span<const Document> labeled) {
  std::vector<double> ai_ppl, ai_burst, human_ppl, human_burst;
  for (const Document& d : labeled) {
    if (d.origin == Origin::Unknown) continue;
    const double p = perplexity(model, d.text);
    const double b = burstiness(model, d.text);
    if (d.origin == Origin::AiGenerated) {
      ai_ppl.push_back(p);
      ai_burst.push_back(b);
    } else {
      human_ppl.push_back(p);
      human_burst.push_back(b);
    }
  }
  if (ai_ppl.empty() || human_ppl.empty()) {
    throw Error(ErrorKind::Calibration,
                "calibration needs at least one AI-generated and one human-written document");
  }
  PerplexityThresholds th;
  th.ppl_cut = 0.5 * (median(ai_ppl) + median(human_ppl));
  th.burst_cut = 0.5 * (median(ai_burst) + median(human_burst));
  if (!(th.ppl_cut > 1.0)) {
    throw Error(ErrorKind::Calibration, "calibrated perplexity cut is not above 1");
  }
  return th;
}

PerplexityDetector::PerplexityDetector(std::string id, std::shared_ptr<const NgramModel> model,
                                       PerplexityThresholds th)
    : id_(std::move(id)), model_(std::move(model)), th_(th) {
  if (!model_) throw Error(ErrorKind::Config, "perplexity detector without a model");
  if (!(th_.ppl_cut > 1.0) || !(th_.burst_cut >= 0.0)) {
    throw Error(ErrorKind::Config, "perplexity thresholds need ppl_cut > 1 and burst_cut >= 0");
  }
}

DetectionResult PerplexityDetector::detect(const Document& doc) const {
  DetectionResult r = detect_perplexity(*model_, th_, doc);
  r.detector_id = id_;
  return r;
}

ClassifierDetector::ClassifierDetector(std::string id,
                                       std::shared_ptr<const ClassifierModel> model)
    : id_(std::move(id)), model_(std::move(model)) {
  if (!model_) throw Error(ErrorKind::Config, "classifier detector without a model");
}

DetectionResult ClassifierDetector::detect(const Document& doc) const {
  return detect_classifier(*model_, doc, id_);
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::filesystem::path existing_model(const nlohmann::json& spec,
                                     const std::filesystem::path& base_dir,
                                     const std::string& id) {
  if (!spec.contains("model") || !spec["model"].is_string()) {
    throw Error(ErrorKind::Config, "detector '" + id + "' needs a \"model\" path");
  }
  const auto path = resolve(base_dir, spec["model"].get<std::string>());
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::Config, "detector '" + id + "': model file not found: " + path.string());
  }
  return path;
}

std::shared_ptr<const Detector> build_detector(const nlohmann::json& spec,
                                               const std::filesystem::path& base_dir) {
  if (!spec.is_object()) throw Error(ErrorKind::Config, "detector spec must be a JSON object");
  const std::string type = spec.value("type", "");
  const std::string id = spec.value("id", type);

  if (type == "perplexity") {
    auto model = std::make_shared<const NgramModel>(
        NgramModel::load(existing_model(spec, base_dir, id)));
    PerplexityThresholds th;
    if (spec.contains("calibration")) {
      const auto& cal = spec["calibration"];
      if (!cal.contains("ai") || !cal.contains("human")) {
        throw Error(ErrorKind::Config, "calibration needs \"ai\" and \"human\" corpus paths");
      }
      std::vector<Document> docs =
          read_corpus(resolve(base_dir, cal["ai"].get<std::string>()), Origin::AiGenerated);
      std::vector<Document> human =
          read_corpus(resolve(base_dir, cal["human"].get<std::string>()), Origin::HumanWritten);
      docs.insert(docs.end(), human.begin(), human.end());
      th = calibrate_thresholds(*model, docs);
    } else if (spec.contains("ppl_cut") && spec.contains("burst_cut")) {
      th.ppl_cut = spec["ppl_cut"].get<double>();
      th.burst_cut = spec["burst_cut"].get<double>();
    } else {
      throw Error(ErrorKind::Config, "perplexity detector '" + id +
                                         "' needs ppl_cut/burst_cut or a calibration block");
    }
    return std::make_shared<PerplexityDetector>(id, std::move(model), th);
  }
  if (type == "classifier") {
    ClassifierModel m = ClassifierModel::load(existing_model(spec, base_dir, id));
    if (spec.contains("tie_band")) m.tie_band = spec["tie_band"].get<double>();
    return std::make_shared<ClassifierDetector>(id,
                                                std::make_shared<const ClassifierModel>(std::move(m)));
  }
  if (type == "remote") {
    RemoteDetectorConfig cfg = RemoteDetectorConfig::from_json(spec);
    cfg.id = id;
    return std::make_shared<RemoteDetector>(std::move(cfg));
  }
  throw Error(ErrorKind::Config, "unknown detector type '" + type +
                                     "' (expected perplexity, classifier or remote)");
}

}  // namespace

std::shared_ptr<const Detector> make_detector(const nlohmann::json& spec,
                                              const std::filesystem::path& base_dir) {
  try {
    return build_detector(spec, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("detector spec: ") + e.what());
  }
}

}  // namespace gauntlet

#include <algorithm>
#include <bit>
#include <cmath>

#include "gauntlet/detectors.hpp"
#include "gauntlet/error.hpp"
#include "gauntlet/hashing.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

namespace {

constexpr std::string_view kMagic = "GNTLCLSF";
constexpr std::uint32_t kVersion = 1;

void check_shape(std::uint32_t feature_dim, NgramRange range) {
  if (feature_dim == 0 || !std::has_single_bit(feature_dim)) {
    throw Error(ErrorKind::Config, "feature_dim must be a power of two");
  }
  if (range.min < 1 || range.min > range.max) {
    throw Error(ErrorKind::Config, "n-gram range must satisfy 1 <= min <= max");
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

std::uint32_t feature_bucket(std::string_view ngram, std::uint32_t feature_dim) {
  return static_cast<std::uint32_t>(fnv1a64(ngram) & (feature_dim - 1));
}

SparseVector featurize(std::string_view text, NgramRange range, std::uint32_t feature_dim) {
  check_shape(feature_dim, range);
  const std::u32string cps = decode_utf8(text);
  std::vector<std::uint32_t> buckets;
  std::string gram;
  for (int n = range.min; n <= range.max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= cps.size(); ++i) {
      gram.clear();
      for (std::size_t k = 0; k < len; ++k) append_utf8(gram, cps[i + k]);
      buckets.push_back(feature_bucket(gram, feature_dim));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  SparseVector out;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    out.emplace_back(buckets[i], static_cast<double>(j - i));
    i = j;
  }
  double norm = 0.0;
  for (const auto& [_, v] : out) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [_, v] : out) v /= norm;
  }
  return out;
}

double ClassifierModel::logit(const SparseVector& x) const {
  double z = bias;
  for (const auto& [idx, v] : x) z += weights[idx] * v;
  return z;
}

double ClassifierModel::ai_probability(std::string_view text) const {
  return sigmoid(logit(featurize(text, ngram_range, feature_dim)));
}

Verdict verdict_for_probability(double p, double tie_band) {
  if (p > 0.5 + tie_band) return Verdict::AI;
  if (p < 0.5 - tie_band) return Verdict::Human;
  return Verdict::Tie;
}

DetectionResult detect_classifier(const ClassifierModel& model, const Document& doc,
                                  std::string detector_id) {
  DetectionResult r;
  const double p = model.ai_probability(doc.text);
  r.verdict = verdict_for_probability(p, model.tie_band);
  r.ai_probability = p;
  r.detector_id = std::move(detector_id);
  return r;
}

ClassifierModel train_classifier(std::span<const Document> labeled,
                                 const ClassifierConfig& config,
                                 std::vector<double>* losses) {
  check_shape(config.feature_dim, config.ngram_range);
  if (!(config.learning_rate > 0.0 && std::isfinite(config.learning_rate)) || config.epochs < 0 || !(config.tie_band >= 0.0)) {
    throw Error(ErrorKind::Config, "classifier needs a finite learning_rate > 0, epochs >= 0, tie_band >= 0");
  }

  std::vector<SparseVector> xs;
  std::vector<double> ys;
  std::size_t n_ai = 0;
  for (const Document& d : labeled) {
    if (d.origin == Origin::Unknown) continue;
    xs.push_back(featurize(d.text, config.ngram_range, config.feature_dim));
    const bool ai = d.origin == Origin::AiGenerated;
    ys.push_back(ai ? 1.0 : 0.0);
    n_ai += ai ? 1 : 0;
  }
  if (n_ai == 0 || n_ai == xs.size()) {
    throw Error(ErrorKind::Training,
                "classifier training needs both AI-generated and human-written documents");
  }

  ClassifierModel m;
  m.feature_dim = config.feature_dim;
  m.weights.assign(config.feature_dim, 0.0);
  m.ngram_range = config.ngram_range;
  m.tie_band = config.tie_band;

  std::vector<std::uint32_t> active;
  for (const auto& x : xs) {
    for (const auto& [idx, _] : x) active.push_back(idx);
  }
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<double> grad(config.feature_dim, 0.0);
  if (losses) losses->clear();

  auto check_loss = [](double loss) {
    if (!std::isfinite(loss)) throw Error(ErrorKind::Training, "classifier loss is not finite");
  };

  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    for (std::uint32_t idx : active) grad[idx] = 0.0;
    double grad_bias = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = m.logit(xs[i]);
      loss += ys[i] > 0.5 ? softplus(-z) : softplus(z);
      const double g = sigmoid(z) - ys[i];
      grad_bias += g;
      for (const auto& [idx, v] : xs[i]) grad[idx] += g * v;
    }
    loss *= inv_n;
    check_loss(loss);
    if (losses) losses->push_back(loss);
    if (epoch == config.epochs) break;

    const double step = config.learning_rate * inv_n;
    for (std::uint32_t idx : active) m.weights[idx] -= step * grad[idx];
    m.bias -= step * grad_bias;
  }
  return m;
}

std::string ClassifierModel::serialize() const {
  serial::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(feature_dim);
  w.u32(static_cast<std::uint32_t>(ngram_range.min));
  w.u32(static_cast<std::uint32_t>(ngram_range.max));
  w.f64(tie_band);
  w.f64(bias);
  std::uint32_t nnz = 0;
  for (double v : weights) nnz += v != 0.0 ? 1 : 0;
  w.u32(nnz);
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    w.u32(i);
    w.f64(weights[i]);
  }
  return std::move(w).take();
}

ClassifierModel ClassifierModel::deserialize(std::string_view bytes) {
  serial::Reader r(bytes, "classifier model");
  if (r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorKind::Format, "not a classifier model file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorKind::Version, "unsupported classifier model version " + std::to_string(version));
  }
  ClassifierModel m;
  m.feature_dim = r.u32();
  m.ngram_range.min = static_cast<int>(r.u32());
  m.ngram_range.max = static_cast<int>(r.u32());
  try {
    check_shape(m.feature_dim, m.ngram_range);
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, std::string("classifier model file: ") + e.what());
  }
  m.tie_band = r.f64();
  m.bias = r.f64();
  m.weights.assign(m.feature_dim, 0.0);
  const std::uint32_t nnz = r.u32();
  for (std::uint32_t k = 0; k < nnz; ++k) {
    const std::uint32_t idx = r.u32();
    if (idx >= m.feature_dim) throw Error(ErrorKind::Format, "weight index out of range");
    m.weights[idx] = r.f64();
  }
  if (!r.done()) throw Error(ErrorKind::Format, "trailing bytes after classifier model");
  return m;
}

void ClassifierModel::save(const std::filesystem::path& path) const {
  serial::write_file(path, serialize());
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path) {
  return deserialize(serial::read_file(path));
}

}  // namespace gauntlet

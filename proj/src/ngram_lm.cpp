#include "gauntlet/ngram_lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "gauntlet/error.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

namespace {

constexpr std::string_view kMagic = "GNTLNGRM";

}  // namespace

NgramModel NgramModel::train(std::span<const std::string> corpus, int order,
                             double alpha, TokenMode mode) {
  if (corpus.empty()) throw Error(ErrorKind::Config, "training corpus is empty");
  if (order < 1) throw Error(ErrorKind::Config, "n-gram order must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Config, "smoothing alpha must be a positive finite number");
  }

  NgramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  m.mode_ = mode;
  m.surfaces_.push_back("<unk>");

  const auto ctx_len = static_cast<std::size_t>(order - 1);
  std::vector<TokenId> window;
  for (const std::string& doc : corpus) {
    const TokenStream stream = tokenize(doc, mode);
    window.assign(ctx_len, kBos);
    for (const Token& tok : stream.tokens) {
      auto [it, inserted] = m.ids_.try_emplace(tok.surface, static_cast<TokenId>(m.surfaces_.size()));
      if (inserted) m.surfaces_.push_back(tok.surface);
      const TokenId id = it->second;

      ContextStats& stats = m.contexts_[m.context_key(window)];
      ++stats.total;
      ++stats.next[id];
      ++m.training_tokens_;

      if (ctx_len > 0) {
        std::shift_left(window.begin(), window.end(), 1);
        window.back() = id;
      }
    }
  }
  if (m.training_tokens_ == 0) {
    throw Error(ErrorKind::Data, "training corpus contains no tokens");
  }
  return m;
}

std::string NgramModel::context_key(std::span<const TokenId> history) const {
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  std::string key(ctx_len * sizeof(TokenId), '\0');
  // right-align the history, padding missing positions with BOS
  for (std::size_t i = 0; i < ctx_len; ++i) {
    TokenId id = kBos;
    if (history.size() + i >= ctx_len) id = history[history.size() + i - ctx_len];
    std::memcpy(key.data() + i * sizeof(TokenId), &id, sizeof(TokenId));
  }
  return key;
}

NgramModel::TokenId NgramModel::id_of(std::string_view surface) const {
  const auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& NgramModel::surface_of(TokenId id) const {
  if (id >= surfaces_.size()) throw Error(ErrorKind::Usage, "token id out of range");
  return surfaces_[id];
}

namespace {

std::vector<NgramModel::TokenId> ids_for_context(const NgramModel& m,
                                                 std::span<const std::string> context) {
  std::vector<NgramModel::TokenId> ids;
  ids.reserve(context.size());
  for (const std::string& s : context) {
    ids.push_back(s.empty() ? NgramModel::kBos : m.id_of(s));
  }
  return ids;
}

}  // namespace

std::uint64_t NgramModel::count(std::span<const std::string> context,
                                std::string_view token) const {
  const auto ids = ids_for_context(*this, context);
  const auto it = contexts_.find(context_key(ids));
  if (it == contexts_.end()) return 0;
  const auto jt = it->second.next.find(id_of(token));
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NgramModel::context_total(std::span<const std::string> context) const {
  const auto ids = ids_for_context(*this, context);
  const auto it = contexts_.find(context_key(ids));
  return it == contexts_.end() ? 0 : it->second.total;
}

double NgramModel::cond_prob_ids(std::span<const TokenId> history, TokenId token) const {
  std::uint64_t c = 0;
  std::uint64_t total = 0;
  const auto it = contexts_.find(context_key(history));
  if (it != contexts_.end()) {
    total = it->second.total;
    const auto jt = it->second.next.find(token);
    if (jt != it->second.next.end()) c = jt->second;
  }
  const double v = static_cast<double>(surfaces_.size());
  return (static_cast<double>(c) + alpha_) / (static_cast<double>(total) + alpha_ * v);
}

double NgramModel::cond_prob(std::span<const std::string> history,
                             std::string_view token) const {
  const auto ids = ids_for_context(*this, history);
  return cond_prob_ids(ids, id_of(token));
}

std::vector<NgramModel::TokenId> NgramModel::encode(const TokenStream& stream) const {
  std::vector<TokenId> ids;
  ids.reserve(stream.size());
  for (const Token& t : stream.tokens) ids.push_back(id_of(t.surface));
  return ids;
}

std::vector<double> NgramModel::token_log2_probs(const TokenStream& stream) const {
  const std::vector<TokenId> ids = encode(stream);
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t from = i >= ctx_len ? i - ctx_len : 0;
    const std::span<const TokenId> history(ids.data() + from, i - from);
    out.push_back(std::log2(cond_prob_ids(history, ids[i])));
  }
  return out;
}

std::string NgramModel::serialize() const {
  serial::Writer w;
  w.bytes(kMagic);
  w.u32(kNgramFormatVersion);
  w.u32(static_cast<std::uint32_t>(order_));
  w.u8(mode_ == TokenMode::Char ? 0 : 1);
  w.f64(alpha_);
  w.u64(training_tokens_);
  w.u32(static_cast<std::uint32_t>(surfaces_.size() - 1));
  for (std::size_t i = 1; i < surfaces_.size(); ++i) w.str(surfaces_[i]);

  std::vector<const std::pair<const std::string, ContextStats>*> sorted;
  sorted.reserve(contexts_.size());
  for (const auto& kv : contexts_) sorted.push_back(&kv);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  w.u64(sorted.size());
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  for (const auto* kv : sorted) {
    for (std::size_t i = 0; i < ctx_len; ++i) {
      TokenId id;
      std::memcpy(&id, kv->first.data() + i * sizeof(TokenId), sizeof(TokenId));
      w.u32(id);
    }
    w.u64(kv->second.total);
    std::vector<std::pair<TokenId, std::uint64_t>> next(kv->second.next.begin(),
                                                        kv->second.next.end());
    std::sort(next.begin(), next.end());
    w.u32(static_cast<std::uint32_t>(next.size()));
    for (const auto& [id, c] : next) {
      w.u32(id);
      w.u64(c);
    }
  }
  return std::move(w).take();
}

NgramModel NgramModel::deserialize(std::string_view bytes) {
  serial::Reader r(bytes, "n-gram model");
  if (r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorKind::Format, "not an n-gram model file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kNgramFormatVersion) {
    throw Error(ErrorKind::Version, "unsupported n-gram model version " +
                                        std::to_string(version) + " (expected " +
                                        std::to_string(kNgramFormatVersion) + ")");
  }
  NgramModel m;
  const std::uint32_t order = r.u32();
  if (order < 1 || order > 64) throw Error(ErrorKind::Format, "bad n-gram order in model file");
  m.order_ = static_cast<int>(order);
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw Error(ErrorKind::Format, "bad tokenization mode in model file");
  m.mode_ = mode == 0 ? TokenMode::Char : TokenMode::WordWs;
  m.alpha_ = r.f64();
  if (!(m.alpha_ > 0.0) || !std::isfinite(m.alpha_)) {
    throw Error(ErrorKind::Format, "bad smoothing alpha in model file");
  }
  m.training_tokens_ = r.u64();

  const std::uint32_t vocab = r.u32();
  m.surfaces_.reserve(vocab + 1);
  m.surfaces_.push_back("<unk>");
  for (std::uint32_t i = 0; i < vocab; ++i) {
    std::string s = r.str();
    if (s.empty() || !m.ids_.try_emplace(s, static_cast<TokenId>(m.surfaces_.size())).second) {
      throw Error(ErrorKind::Format, "empty or duplicate vocabulary entry in model file");
    }
    m.surfaces_.push_back(std::move(s));
  }

  const std::uint64_t n_ctx = r.u64();
  const auto ctx_len = static_cast<std::size_t>(m.order_ - 1);
  const auto vsize = m.surfaces_.size();
  std::vector<TokenId> ctx(ctx_len);
  for (std::uint64_t k = 0; k < n_ctx; ++k) {
    for (std::size_t i = 0; i < ctx_len; ++i) {
      ctx[i] = r.u32();
      if (ctx[i] != kBos && ctx[i] >= vsize) throw Error(ErrorKind::Format, "context id out of range");
    }
    ContextStats stats;
    stats.total = r.u64();
    const std::uint32_t n_next = r.u32();
    std::uint64_t sum = 0;
    for (std::uint32_t j = 0; j < n_next; ++j) {
      const TokenId id = r.u32();
      const std::uint64_t c = r.u64();
      if (id >= vsize || id == kUnk) throw Error(ErrorKind::Format, "token id out of range");
      stats.next.emplace(id, c);
      sum += c;
    }
    if (sum != stats.total) throw Error(ErrorKind::Format, "context total does not match its counts");
    if (!m.contexts_.emplace(m.context_key(ctx), std::move(stats)).second) {
      throw Error(ErrorKind::Format, "duplicate context in model file");
    }
  }
  if (!r.done()) throw Error(ErrorKind::Format, "trailing bytes after n-gram model");
  return m;
}

void NgramModel::save(const std::filesystem::path& path) const {
  serial::write_file(path, serialize());
}

NgramModel NgramModel::load(const std::filesystem::path& path) {
  return deserialize(serial::read_file(path));
}

double perplexity_from_log2_probs(std::span<const double> log2_probs) {
  if (log2_probs.empty()) {
    throw Error(ErrorKind::DegenerateInput, "perplexity of an empty token stream");
  }
  const double sum = std::accumulate(log2_probs.begin(), log2_probs.end(), 0.0);
  return std::exp2(-sum / static_cast<double>(log2_probs.size()));
}

double perplexity_from_probabilities(std::span<const double> probs) {
  std::vector<double> logs;
  logs.reserve(probs.size());
  for (double p : probs) logs.push_back(std::log2(p));
  return perplexity_from_log2_probs(logs);
}

double perplexity(const NgramModel& model, std::string_view text) {
  const TokenStream stream = tokenize(text, model.mode());
  return perplexity_from_log2_probs(model.token_log2_probs(stream));
}

double burstiness(const NgramModel& model, std::string_view text) {
  const std::vector<std::string> sentences = split_sentences(text);
  if (sentences.empty()) {
    throw Error(ErrorKind::DegenerateInput, "burstiness of an empty text");
  }
  if (sentences.size() == 1) return 0.0;
  std::vector<double> ppl;
  ppl.reserve(sentences.size());
  for (const std::string& s : sentences) ppl.push_back(perplexity(model, s));
  const double n = static_cast<double>(ppl.size());
  const double mean = std::accumulate(ppl.begin(), ppl.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : ppl) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

}  // namespace gauntlet

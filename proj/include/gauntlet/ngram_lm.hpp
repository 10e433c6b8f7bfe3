#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gauntlet/text_core.hpp"

namespace gauntlet {

// Order-n character or word model with add-alpha smoothing.
//
// Every document is left-padded with (order - 1) begin-of-text markers that
// live only in contexts, never in the vocabulary. The vocabulary is every
// surface seen in training plus one reserved UNK entry; unseen surfaces, in a
// context or as the predicted token, map to UNK.
//
//   p(t | c) = (count(c, t) + alpha) / (total(c) + alpha * |V|)
//
// A trained model is immutable and may be shared between threads.
class NgramModel {
 public:
  using TokenId = std::uint32_t;

  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kBos = 0xFFFFFFFFu;

  static NgramModel train(std::span<const std::string> corpus, int order,
                          double alpha, TokenMode mode);

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  TokenMode mode() const noexcept { return mode_; }
  // Including UNK.
  std::size_t vocab_size() const noexcept { return surfaces_.size(); }
  std::uint64_t training_tokens() const noexcept { return training_tokens_; }
  std::size_t context_count() const noexcept { return contexts_.size(); }

  TokenId id_of(std::string_view surface) const;
  const std::string& surface_of(TokenId id) const;

  // Raw counts. context is given as surfaces and must hold exactly order-1
  // entries; use an empty string_view for begin-of-text padding.
  std::uint64_t count(std::span<const std::string> context, std::string_view token) const;
  std::uint64_t context_total(std::span<const std::string> context) const;

  // Smoothed conditional probability. Only the last order-1 context entries
  // are used; shorter histories are padded with begin-of-text markers.
  double cond_prob(std::span<const std::string> history, std::string_view token) const;
  double cond_prob_ids(std::span<const TokenId> history, TokenId token) const;

  // log2 p(w_i | context_i) for every token of the stream, in order.
  std::vector<double> token_log2_probs(const TokenStream& stream) const;
  std::vector<TokenId> encode(const TokenStream& stream) const;

  void save(const std::filesystem::path& path) const;
  static NgramModel load(const std::filesystem::path& path);

  std::string serialize() const;
  static NgramModel deserialize(std::string_view bytes);

 private:
  struct ContextStats {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };

  NgramModel() = default;

  std::string context_key(std::span<const TokenId> history) const;

  int order_ = 1;
  double alpha_ = 0.1;
  TokenMode mode_ = TokenMode::Char;
  std::uint64_t training_tokens_ = 0;
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
  std::unordered_map<std::string, ContextStats> contexts_;
};

inline constexpr std::uint32_t kNgramFormatVersion = 1;

// 2^(-(1/N) * sum log2 p_i). Throws DegenerateInput on an empty span.
double perplexity_from_log2_probs(std::span<const double> log2_probs);
double perplexity_from_probabilities(std::span<const double> probs);

double perplexity(const NgramModel& model, std::string_view text);

// Population standard deviation of per-sentence perplexities; 0 for texts of
// at most one sentence.
double burstiness(const NgramModel& model, std::string_view text);

inline void save_model(const NgramModel& model, const std::filesystem::path& path) {
  model.save(path);
}
inline NgramModel load_model(const std::filesystem::path& path) {
  return NgramModel::load(path);
}

}  // namespace gauntlet

#include "gauntlet/perturb.hpp"

#include <array>
#include <cctype>

#include "gauntlet/error.hpp"
#include "gauntlet/hashing.hpp"

namespace gauntlet {

namespace {

struct StrategyName {
  StrategyKind kind;
  std::string_view name;
};

constexpr std::array<StrategyName, 8> kNames{{
    {StrategyKind::NoPrompt, "noprompt"},
    {StrategyKind::SpaceInfi, "spaceinfi"},
    {StrategyKind::PeriodInsert, "period"},
    {StrategyKind::PluralFlip, "plural"},
    {StrategyKind::ActLikeHuman, "actlikehuman"},
    {StrategyKind::Colloquial, "colloquial"},
    {StrategyKind::Slang, "slang"},
    {StrategyKind::Shakespearean, "shakespearean"},
}};

}  // namespace

std::string_view to_string(StrategyKind kind) {
  for (const auto& n : kNames) {
    if (n.kind == kind) return n.name;
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "periodinsert") key = "period";
  if (key == "pluralflip") key = "plural";
  for (const auto& n : kNames) {
    if (n.name == key) return n.kind;
  }
  throw Error(ErrorKind::Usage, "unknown strategy '" + std::string(name) + "'");
}

bool is_edit_strategy(StrategyKind kind) noexcept {
  return kind == StrategyKind::SpaceInfi || kind == StrategyKind::PeriodInsert ||
         kind == StrategyKind::PluralFlip;
}

bool is_prompt_strategy(StrategyKind kind) noexcept {
  return kind == StrategyKind::ActLikeHuman || kind == StrategyKind::Colloquial ||
         kind == StrategyKind::Slang || kind == StrategyKind::Shakespearean;
}

Strategy Strategy::edit(StrategyKind kind, std::uint64_t seed) {
  if (!is_edit_strategy(kind)) {
    throw Error(ErrorKind::Usage, std::string(to_string(kind)) + " is not an edit strategy");
  }
  return Strategy{kind, seed};
}

Strategy Strategy::prompt(StrategyKind kind) {
  if (is_edit_strategy(kind)) {
    throw Error(ErrorKind::Usage, std::string(to_string(kind)) + " is an edit strategy");
  }
  return Strategy{kind, std::nullopt};
}

namespace {

PerturbationOutcome unchanged(std::string_view text) {
  return PerturbationOutcome{std::string(text), false, std::nullopt};
}

PerturbationOutcome insert_at(std::string_view text, std::size_t offset, char32_t cp) {
  std::u32string cps = decode_utf8(text);
  cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(offset), cp);
  return PerturbationOutcome{encode_utf8(cps), true, offset};
}

struct WordSpan {
  std::size_t begin;  // scalar offsets, end exclusive
  std::size_t end;
};

// Scalar extents of the Word tokens of a WordWs tokenization.
std::vector<WordSpan> word_spans(std::string_view text) {
  const TokenStream ts = tokenize(text, TokenMode::WordWs);
  std::vector<WordSpan> out;
  std::size_t pos = 0;
  for (const Token& t : ts.tokens) {
    if (t.space_before) ++pos;
    const std::size_t len = decode_utf8(t.surface).size();
    if (t.kind == TokenKind::Word) out.push_back({pos, pos + len});
    pos += len;
  }
  return out;
}

bool ascii_alpha(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

}  // namespace

PerturbationOutcome space_infi(std::string_view text, std::uint64_t seed) {
  const std::vector<std::size_t> commas = comma_positions(text);
  if (commas.empty()) return unchanged(text);
  return insert_at(text, commas[seed % commas.size()], U' ');
}

PerturbationOutcome period_insert(std::string_view text, std::uint64_t seed) {
  const std::vector<WordSpan> words = word_spans(text);
  if (words.empty()) return unchanged(text);
  return insert_at(text, words[seed % words.size()].end, U'.');
}

PerturbationOutcome plural_flip(std::string_view text, std::uint64_t seed) {
  const std::u32string cps = decode_utf8(text);
  std::vector<WordSpan> candidates;
  for (const WordSpan& w : word_spans(text)) {
    const std::size_t len = w.end - w.begin;
    if (len < 3) continue;
    bool alpha = true;
    for (std::size_t i = w.begin; i < w.end && alpha; ++i) alpha = ascii_alpha(cps[i]);
    if (!alpha) continue;
    if (cps[w.end - 1] == U's' && cps[w.end - 2] == U's') continue;
    candidates.push_back(w);
  }
  if (candidates.empty()) return unchanged(text);

  const WordSpan w = candidates[seed % candidates.size()];
  std::u32string out = cps;
  if (cps[w.end - 1] == U's') {
    out.erase(w.end - 1, 1);
    return PerturbationOutcome{encode_utf8(out), true, w.end - 1};
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(w.end), U's');
  return PerturbationOutcome{encode_utf8(out), true, w.end};
}

PerturbationOutcome apply_strategy(const Strategy& strategy, const Document& doc) {
  if (strategy.kind == StrategyKind::NoPrompt) {
    return PerturbationOutcome{doc.text, true, std::nullopt};
  }
  if (!is_edit_strategy(strategy.kind)) {
    throw Error(ErrorKind::Usage,
                std::string(to_string(strategy.kind)) +
                    " is a prompt strategy; it runs at generation time, not as an edit");
  }
  if (!strategy.seed) {
    throw Error(ErrorKind::Usage, "edit strategy without a seed");
  }
  const std::uint64_t seed = combine_seed(*strategy.seed, doc.id);
  switch (strategy.kind) {
    case StrategyKind::SpaceInfi: return space_infi(doc.text, seed);
    case StrategyKind::PeriodInsert: return period_insert(doc.text, seed);
    case StrategyKind::PluralFlip: return plural_flip(doc.text, seed);
    default: break;
  }
  throw Error(ErrorKind::Internal, "unhandled edit strategy");
}

std::string prompt_for(StrategyKind kind, std::string_view question) {
  std::string_view requirement;
  switch (kind) {
    case StrategyKind::NoPrompt:
      return std::string(question);
    case StrategyKind::ActLikeHuman:
      requirement =
          "Answer the question like a human and avoid being found that the answer "
          "was generated by chatGPT.";
      break;
    case StrategyKind::Colloquial:
      requirement = "Using more colloquial expressions in the response.";
      break;
    case StrategyKind::Slang:
      requirement = "Answer the question in slang style.";
      break;
    case StrategyKind::Shakespearean:
      requirement = "Answer the question in Shakespearean style.";
      break;
    default:
      throw Error(ErrorKind::Usage,
                  std::string(to_string(kind)) + " is an edit strategy and has no prompt");
  }
  std::string out = "Question: ";
  out += question;
  out += "\n\nRequirement: ";
  out += requirement;
  return out;
}

}  // namespace gauntlet

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gauntlet/text_core.hpp"

namespace gauntlet {

enum class StrategyKind {
  NoPrompt,
  SpaceInfi,
  PeriodInsert,
  PluralFlip,
  ActLikeHuman,
  Colloquial,
  Slang,
  Shakespearean,
};

std::string_view to_string(StrategyKind kind);
// Accepts the canonical names ("noprompt", "spaceinfi", "period", "plural",
// "actlikehuman", "colloquial", "slang", "shakespearean") case-insensitively,
// with '-' and '_' ignored, plus "period-insert" and "plural-flip".
StrategyKind parse_strategy(std::string_view name);

bool is_edit_strategy(StrategyKind kind) noexcept;
bool is_prompt_strategy(StrategyKind kind) noexcept;

struct Strategy {
  StrategyKind kind = StrategyKind::NoPrompt;
  // Only meaningful for edit strategies.
  std::optional<std::uint64_t> seed;

  static Strategy edit(StrategyKind kind, std::uint64_t seed);
  static Strategy prompt(StrategyKind kind);
};

struct PerturbationOutcome {
  std::string text;
  bool applied = false;
  // Scalar offset of the inserted or changed character in the output.
  std::optional<std::size_t> edit_offset;
};

// Inserts one U+0020 before comma number (seed mod comma_count).
PerturbationOutcome space_infi(std::string_view text, std::uint64_t seed);

// Inserts '.' right after the end of Word token number (seed mod word_count).
PerturbationOutcome period_insert(std::string_view text, std::uint64_t seed);

// Candidates are alphabetic Word tokens of length >= 3 not ending in "ss".
// The chosen word loses its trailing 's' or gains one.
PerturbationOutcome plural_flip(std::string_view text, std::uint64_t seed);

// NoPrompt is the identity. Edit strategies run with the per-document seed
// combine_seed(strategy.seed, doc.id). Prompt strategies are a usage error.
PerturbationOutcome apply_strategy(const Strategy& strategy, const Document& doc);

// "Question: {question}\n\nRequirement: {requirement}" for prompt strategies;
// the bare question for NoPrompt; usage error for edit strategies.
std::string prompt_for(StrategyKind kind, std::string_view question);

}  // namespace gauntlet

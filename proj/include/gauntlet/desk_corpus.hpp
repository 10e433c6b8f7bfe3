#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gauntlet/text_core.hpp"

// Synthetic desk-scale corpora.
//
// AI-like documents are well-formed template prose: no whitespace before any
// punctuation, no doubled spaces, no typos. Human-like documents draw from the
// same content distribution and then receive exactly one small slip, most
// often a space before a comma, otherwise a space before a period, a doubled
// space, a lowercase sentence start, a transposed pair of letters or a missing
// space after a comma. The two classes differ only in surface noise.
//
// Output depends only on the seed; std::mt19937_64 is specified bit-exactly
// and draws are reduced with a plain modulus, never with std distributions.
namespace gauntlet::desk {

std::string ai_like_text(std::mt19937_64& rng);

// Applies exactly one slip.
std::string add_human_noise(std::string_view clean, std::mt19937_64& rng);

// question is "Describe <topic>." for the topic the text was written about.
std::vector<Document> ai_like_documents(std::size_t count, std::uint64_t seed,
                                        std::string_view id_prefix = "ai");
std::vector<Document> human_like_documents(std::size_t count, std::uint64_t seed,
                                           std::string_view id_prefix = "human");

// AI-like texts totalling at least min_bytes.
std::vector<std::string> clean_corpus(std::size_t min_bytes, std::uint64_t seed);

// True when some whitespace character directly precedes a comma.
bool has_space_before_comma(std::string_view text);

}  // namespace gauntlet::desk

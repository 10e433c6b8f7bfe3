#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gauntlet {

enum class Origin { AiGenerated, HumanWritten, Unknown };

// One benchmark item's text plus identity and provenance.
struct Document {
  std::string id;
  std::string question;
  std::string text;
  Origin origin = Origin::Unknown;
};

enum class TokenMode { Char, WordWs };

std::string_view to_string(TokenMode mode);
TokenMode parse_token_mode(std::string_view name);

enum class TokenKind { Word, Punct, AnomSpace, Char };

struct Token {
  TokenKind kind = TokenKind::Char;
  std::string surface;
  // WordWs only: a single U+0020 separated this token from the previous one
  // and was absorbed into the tokenization instead of becoming AnomSpace.
  bool space_before = false;

  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenStream {
  std::vector<Token> tokens;
  TokenMode mode = TokenMode::Char;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

// UTF-8 helpers. decode_utf8 rejects overlongs, surrogates and values past
// U+10FFFF with ErrorKind::Encoding.
std::u32string decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);
bool is_valid_utf8(std::string_view text) noexcept;

bool is_space(char32_t cp) noexcept;
bool is_punct(char32_t cp) noexcept;

// Lossless tokenization. In WordWs mode words are maximal runs of
// non-space non-punctuation scalars and every punctuation scalar is its own
// token. A lone U+0020 that is followed by a Word token (and preceded by any
// token) is folded into that word's space_before flag; every other whitespace
// run becomes an AnomSpace token, so "x ," keeps the space before the comma.
TokenStream tokenize(std::string_view text, TokenMode mode);
std::string detokenize(const TokenStream& stream);

// Sentences end at '.', '!' or '?' followed by whitespace or end of text and
// keep their terminator. Whitespace between sentences is dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Scalar-value offsets of every ',' in ascending order.
std::vector<std::size_t> comma_positions(std::string_view text);

// Levenshtein distance over Unicode scalar values.
std::size_t char_diff_count(std::string_view a, std::string_view b);

std::string trim_whitespace(std::string_view text);

}  // namespace gauntlet

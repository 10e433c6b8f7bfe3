#include "gauntlet/text_core.hpp"

#include <algorithm>
#include <numeric>

#include "gauntlet/error.hpp"

namespace gauntlet {

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::Char ? "char" : "wordws";
}

TokenMode parse_token_mode(std::string_view name) {
  if (name == "char") return TokenMode::Char;
  if (name == "wordws") return TokenMode::WordWs;
  throw Error(ErrorKind::Usage,
              "unknown tokenization mode '" + std::string(name) +
                  "' (expected char or wordws)");
}

namespace {

// Returns the number of bytes consumed, 0 on malformed input.
std::size_t decode_one(std::string_view s, std::size_t i, char32_t& out) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  out = cp;
  return len;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = 0;
    const std::size_t n = decode_one(text, i, cp);
    if (n == 0) {
      throw Error(ErrorKind::Encoding,
                  "invalid UTF-8 at byte offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += n;
  }
  return out;
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = 0;
    const std::size_t n = decode_one(text, i, cp);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB:
    case 0xBF:
      return true;
    default:
      break;
  }
  // General Punctuation (minus the space characters), CJK punctuation and
  // fullwidth ASCII punctuation.
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  if (cp >= 0x3001 && cp <= 0x3003) return true;
  if (cp >= 0x3008 && cp <= 0x3011) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  return false;
}

namespace {

enum class Segment { Word, Punct, Space };

Segment classify(char32_t cp) {
  if (is_space(cp)) return Segment::Space;
  if (is_punct(cp)) return Segment::Punct;
  return Segment::Word;
}

TokenStream tokenize_words(const std::u32string& cps) {
  TokenStream out;
  out.mode = TokenMode::WordWs;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    const Segment seg = classify(cps[i]);
    if (seg == Segment::Punct) {
      Token t{TokenKind::Punct, {}, false};
      append_utf8(t.surface, cps[i]);
      out.tokens.push_back(std::move(t));
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && classify(cps[j]) == seg) ++j;
    const std::string surface = encode_utf8(std::u32string_view(cps).substr(i, j - i));
    if (seg == Segment::Word) {
      out.tokens.push_back(Token{TokenKind::Word, surface, false});
    } else {
      const bool lone_space = (j - i == 1 && cps[i] == U' ');
      const bool has_prev = !out.tokens.empty();
      const bool next_is_word = j < n && classify(cps[j]) == Segment::Word;
      if (lone_space && has_prev && next_is_word) {
        std::size_t k = j;
        while (k < n && classify(cps[k]) == Segment::Word) ++k;
        Token t{TokenKind::Word,
                encode_utf8(std::u32string_view(cps).substr(j, k - j)), true};
        out.tokens.push_back(std::move(t));
        j = k;
      } else {
        out.tokens.push_back(Token{TokenKind::AnomSpace, surface, false});
      }
    }
    i = j;
  }
  return out;
}

}  // namespace

TokenStream tokenize(std::string_view text, TokenMode mode) {
  const std::u32string cps = decode_utf8(text);
  if (mode == TokenMode::WordWs) return tokenize_words(cps);

  TokenStream out;
  out.mode = TokenMode::Char;
  out.tokens.reserve(cps.size());
  for (char32_t cp : cps) {
    Token t{TokenKind::Char, {}, false};
    append_utf8(t.surface, cp);
    out.tokens.push_back(std::move(t));
  }
  return out;
}

std::string detokenize(const TokenStream& stream) {
  std::string out;
  for (const Token& t : stream.tokens) {
    if (t.space_before) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  std::vector<std::string> out;
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(cps[i])) ++i;
    if (i == n) break;
    std::size_t j = i;
    std::size_t end = n;
    for (; j < n; ++j) {
      const char32_t c = cps[j];
      if ((c == U'.' || c == U'!' || c == U'?') && (j + 1 == n || is_space(cps[j + 1]))) {
        end = j + 1;
        break;
      }
    }
    if (end == n) {
      // unterminated tail: drop trailing whitespace
      while (end > i && is_space(cps[end - 1])) --end;
    }
    out.push_back(encode_utf8(std::u32string_view(cps).substr(i, end - i)));
    i = end;
  }
  return out;
}

std::vector<std::size_t> comma_positions(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == U',') out.push_back(i);
  }
  return out;
}

std::size_t char_diff_count(std::string_view a, std::string_view b) {
  std::u32string x = decode_utf8(a);
  std::u32string y = decode_utf8(b);
  if (x.size() < y.size()) std::swap(x, y);
  // single-row DP over the shorter string
  std::vector<std::size_t> row(y.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (x[i - 1] == y[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[y.size()];
}

std::string trim_whitespace(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace gauntlet

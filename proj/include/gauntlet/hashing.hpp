#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gauntlet {

// 64-bit FNV-1a over the raw bytes. Seedless and byte-order independent, so
// bucket assignments and id-based splits are identical on every platform.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-document seed: mix64(strategy_seed XOR fnv1a64(doc_id)).
constexpr std::uint64_t combine_seed(std::uint64_t strategy_seed,
                                     std::string_view doc_id) noexcept {
  return mix64(strategy_seed ^ fnv1a64(doc_id));
}

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace gauntlet

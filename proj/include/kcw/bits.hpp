#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kcw {

// Binary strings are plain std::string over {'0','1'}; the empty string is epsilon.

inline bool is_binary(std::string_view s) noexcept {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

inline void require_binary(std::string_view s, const char* what) {
  if (!is_binary(s)) {
    throw std::invalid_argument(std::string(what) + ": not a binary string: '" + std::string(s) + "'");
  }
}

/// Number of bits in the standard binary representation of v (0 for v == 0).
constexpr int bit_length(std::uint64_t v) noexcept { return v == 0 ? 0 : 64 - std::countl_zero(v); }

/// Low `len` bits of v, most significant first.
inline std::string to_bits(std::uint64_t v, int len) {
  std::string out(static_cast<std::size_t>(len), '0');
  for (int j = 0; j < len; ++j) {
    if ((v >> (len - 1 - j)) & 1U) out[static_cast<std::size_t>(j)] = '1';
  }
  return out;
}

/// Inverse of to_bits for strings of at most 64 bits.
inline std::uint64_t from_bits(std::string_view s) {
  if (s.size() > 64) throw std::out_of_range("from_bits: more than 64 bits");
  std::uint64_t v = 0;
  for (char c : s) v = (v << 1) | static_cast<std::uint64_t>(c == '1');
  return v;
}

/// "eps" for the empty string; used in human-readable listings only.
inline std::string display_bits(std::string_view s) { return s.empty() ? std::string("eps") : std::string(s); }

}  // namespace kcw

#pragma once

// The fixed enumeration T_1, T_2, ... of machines, the string <-> natural
// correspondence, and Cantor pairing.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "kcw/bits.hpp"
#include "kcw/machine.hpp"

namespace kcw {

using BigInt = mpz_class;
using Rational = mpq_class;

/// 1-based global index into the enumeration.
struct MachineIndex {
  std::uint64_t value = 1;

  constexpr MachineIndex() = default;
  constexpr explicit MachineIndex(std::uint64_t v) : value(v) {}

  friend constexpr auto operator<=>(const MachineIndex&, const MachineIndex&) = default;
};

/// Number of n-state machines: (5(n+1))^(3n), exact.
inline BigInt machine_count(int n) {
  if (n < 1) throw std::invalid_argument("machine_count: n must be >= 1");
  BigInt base = kActionCount * (n + 1);
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(kSymbolCount * n));
  return out;
}

namespace detail {

constexpr std::uint64_t pow_u64(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int j = 0; j < e; ++j) r *= b;
  return r;
}

constexpr std::uint64_t count_u64(int n) { return pow_u64(static_cast<std::uint64_t>(kActionCount * (n + 1)), kSymbolCount * n); }

// kOffsets[n] = number of machines with fewer than n states (n = 1..kMaxStates+1).
constexpr std::array<std::uint64_t, kMaxStates + 2> make_offsets() {
  std::array<std::uint64_t, kMaxStates + 2> out{};
  for (int n = 1; n <= kMaxStates; ++n) out[static_cast<std::size_t>(n + 1)] = out[static_cast<std::size_t>(n)] + count_u64(n);
  return out;
}

inline constexpr auto kOffsets = make_offsets();

}  // namespace detail

/// Machines with fewer than n states; the first n-state machine has index offset + 1.
constexpr std::uint64_t index_offset(int n) { return detail::kOffsets.at(static_cast<std::size_t>(n)); }

/// Largest index the codec supports (all machines with at most kMaxStates states).
constexpr std::uint64_t max_supported_index() { return detail::kOffsets[kMaxStates + 1]; }

constexpr int states_of_index(MachineIndex k) {
  for (int n = 1; n <= kMaxStates; ++n) {
    if (k.value <= index_offset(n + 1)) return n;
  }
  return 0;
}

/// Mixed-radix decoding: the digit for (state s, symbol r) sits at position
/// 3(s-1)+r, least significant first; digit = action * (n+1) + next_state.
inline Machine index_to_machine(MachineIndex k) {
  if (k.value < 1 || k.value > max_supported_index()) {
    throw std::out_of_range("index_to_machine: index " + std::to_string(k.value) + " outside the supported range");
  }
  const int n = states_of_index(k);
  std::uint64_t rem = k.value - index_offset(n) - 1;
  const std::uint64_t radix = static_cast<std::uint64_t>(kActionCount * (n + 1));
  Machine m(n);
  for (int s = 1; s <= n; ++s) {
    for (int r = 0; r < kSymbolCount; ++r) {
      const std::uint64_t digit = rem % radix;
      rem /= radix;
      m.set_entry(s, static_cast<Symbol>(r),
                  Transition{static_cast<Action>(digit / static_cast<std::uint64_t>(n + 1)),
                             static_cast<std::uint8_t>(digit % static_cast<std::uint64_t>(n + 1))});
    }
  }
  return m;
}

inline MachineIndex machine_to_index(const Machine& m) {
  const int n = m.n_states();
  const std::uint64_t radix = static_cast<std::uint64_t>(kActionCount * (n + 1));
  std::uint64_t rem = 0;
  auto table = m.table();
  for (std::size_t pos = table.size(); pos-- > 0;) {
    const Transition& t = table[pos];
    rem = rem * radix + static_cast<std::uint64_t>(t.action) * static_cast<std::uint64_t>(n + 1) + t.next;
  }
  return MachineIndex{index_offset(n) + rem + 1};
}

/// The universe of enumerated machines: all machines with min_states..max_states
/// states, optionally intersected with an explicit inclusive index interval.
struct MachineRange {
  int min_states = 1;
  int max_states = 1;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> interval;

  static MachineRange states(int lo, int hi) {
    MachineRange r{lo, hi, std::nullopt};
    r.validate();
    return r;
  }

  static MachineRange up_to(int n) { return states(1, n); }

  /// Explicit index interval; the state bounds are widened to cover it.
  static MachineRange indices(std::uint64_t first, std::uint64_t last) {
    if (first < 1 || last > max_supported_index()) throw std::out_of_range("MachineRange: index interval out of range");
    MachineRange r;
    r.interval = std::make_pair(first, last);
    if (first <= last) {
      r.min_states = states_of_index(MachineIndex{first});
      r.max_states = states_of_index(MachineIndex{last});
    }
    return r;
  }

  void validate() const {
    if (min_states < 1 || max_states > kMaxStates || min_states > max_states) {
      throw std::invalid_argument("MachineRange: need 1 <= min_states <= max_states <= " + std::to_string(kMaxStates));
    }
  }

  std::uint64_t first() const {
    std::uint64_t f = index_offset(min_states) + 1;
    if (interval) f = std::max(f, interval->first);
    return f;
  }

  /// Inclusive; last() < first() when the range is empty.
  std::uint64_t last() const {
    std::uint64_t l = index_offset(max_states + 1);
    if (interval) l = std::min(l, interval->second);
    return l;
  }

  bool empty() const { return last() < first(); }

  std::uint64_t size() const { return empty() ? 0 : last() - first() + 1; }

  bool contains(std::uint64_t i) const { return i >= first() && i <= last(); }

  /// Stable textual form used in exports: "states:1-2" or "index:1-10000".
  std::string label() const {
    if (interval) return "index:" + std::to_string(interval->first) + "-" + std::to_string(interval->second);
    return "states:" + std::to_string(min_states) + "-" + std::to_string(max_states);
  }

  friend bool operator==(const MachineRange&, const MachineRange&) = default;
};

/// Cantor pairing f(a,b) = (a+b)(a+b+1)/2 + b.
inline BigInt cantor_pair(const BigInt& a, const BigInt& b) {
  if (a < 0 || b < 0) throw std::invalid_argument("cantor_pair: arguments must be natural numbers");
  const BigInt s = a + b;
  return s * (s + 1) / 2 + b;
}

inline std::pair<BigInt, BigInt> cantor_unpair(const BigInt& n) {
  if (n < 0) throw std::invalid_argument("cantor_unpair: argument must be a natural number");
  BigInt disc = 8 * n + 1;
  BigInt root = sqrt(disc);
  const BigInt w = (root - 1) / 2;
  const BigInt t = w * (w + 1) / 2;
  const BigInt b = n - t;
  return {w - b, b};
}

/// The correspondence (eps,0), (0,1), (1,2), (00,3), ...: x maps to the binary
/// expansion of x+1 with its leading 1 removed.
inline std::string nat_to_str(const BigInt& x) {
  if (x < 0) throw std::invalid_argument("nat_to_str: negative argument");
  const BigInt y = x + 1;
  return y.get_str(2).substr(1);
}

inline std::string nat_to_str(std::uint64_t x) { return nat_to_str(BigInt(static_cast<unsigned long>(x))); }

inline BigInt str_to_nat(std::string_view s) {
  require_binary(s, "str_to_nat");
  BigInt y("1" + std::string(s), 2);
  return y - 1;
}

/// l(x) = floor(log2(x+1)), the length of nat_to_str(x).
inline std::size_t strlen_of_nat(const BigInt& x) {
  if (x < 0) throw std::invalid_argument("strlen_of_nat: negative argument");
  const BigInt y = x + 1;
  return mpz_sizeinbase(y.get_mpz_t(), 2) - 1;
}

}  // namespace kcw

#pragma once

// Self-delimiting machine-index codes and the reference machine U, which reads
// a code for i followed by a program p and simulates T_i(p).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kcw/bits.hpp"
#include "kcw/enumeration.hpp"
#include "kcw/machine.hpp"

namespace kcw {

/// 1^l(b) 0 b where b is the binary representation of i. Prefix-free.
inline std::string encode_index(std::uint64_t i) {
  if (i == 0) throw std::invalid_argument("encode_index: index must be >= 1");
  const int k = bit_length(i);
  std::string out(static_cast<std::size_t>(k), '1');
  out += '0';
  out += to_bits(i, k);
  return out;
}

/// Length of encode_index(i): 2 l(b(i)) + 1.
constexpr int encoded_index_length(std::uint64_t i) { return 2 * bit_length(i) + 1; }

struct DecodedProgram {
  BigInt index;
  std::string program;
};

/// Splits bits into (i, p). std::nullopt when the prefix is malformed: no 0
/// after the run of 1s, an empty run, or fewer than k bits left for b(i).
inline std::optional<DecodedProgram> decode_program(std::string_view bits) {
  if (!is_binary(bits)) return std::nullopt;
  std::size_t k = 0;
  while (k < bits.size() && bits[k] == '1') ++k;
  if (k == 0 || k == bits.size()) return std::nullopt;
  if (bits.size() - k - 1 < k) return std::nullopt;
  const std::string_view beta = bits.substr(k + 1, k);
  if (beta.front() != '1') return std::nullopt;  // b(i) has no leading zeros
  DecodedProgram out;
  out.index = BigInt(std::string(beta), 2);
  out.program = std::string(bits.substr(2 * k + 1));
  return out;
}

/// Universe used when none is given: every machine with one or two states.
inline MachineRange default_universe() { return MachineRange::up_to(2); }

/// Reference machine: malformed programs and indices outside `universe` never halt.
inline RunOutcome u_run(std::string_view program, std::uint64_t budget, const MachineRange& universe = default_universe()) {
  if (budget < 1) throw std::invalid_argument("u_run: budget must be >= 1");
  const auto decoded = decode_program(program);
  if (!decoded || !decoded->index.fits_ulong_p() || !universe.contains(decoded->index.get_ui())) {
    return Cutoff{budget};
  }
  return run(index_to_machine(MachineIndex{decoded->index.get_ui()}), decoded->program, budget);
}

/// Index of identity_scanner() in the enumeration.
inline MachineIndex identity_index() { return machine_to_index(identity_scanner()); }

/// Index of immediate_halt() in the enumeration.
inline MachineIndex halt_index() { return machine_to_index(immediate_halt()); }

/// The additive constant c: encoding length of the identity scanner's index,
/// so that every x has a U-program of length l(x) + c.
inline int length_constant() { return encoded_index_length(identity_index().value); }

}  // namespace kcw

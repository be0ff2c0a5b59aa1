#pragma once

// Turing machine model in quadruple format over the tape alphabet {Blank, 0, 1},
// the single-step semantics, and the budgeted run primitive.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kcw/bits.hpp"

namespace kcw {

enum class Symbol : std::uint8_t { Blank = 0, Zero = 1, One = 2 };

enum class Action : std::uint8_t { WriteBlank = 0, WriteZero = 1, WriteOne = 2, MoveLeft = 3, MoveRight = 4 };

inline constexpr int kMaxStates = 4;
inline constexpr int kSymbolCount = 3;
inline constexpr int kActionCount = 5;
inline constexpr int kHaltState = 0;

constexpr int symbol_rank(Symbol s) noexcept { return static_cast<int>(s); }

constexpr Symbol bit_symbol(char c) noexcept { return c == '1' ? Symbol::One : Symbol::Zero; }

struct Transition {
  Action action = Action::WriteBlank;
  std::uint8_t next = kHaltState;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// An n-state machine; the table holds one transition per (state, read symbol).
/// State 0 is the halt state and has no entries. A default-constructed entry is
/// (WriteBlank, halt).
class Machine {
 public:
  explicit Machine(int n_states = 1) : n_states_(n_states) {
    if (n_states < 1 || n_states > kMaxStates) {
      throw std::invalid_argument("Machine: n_states must be in 1.." + std::to_string(kMaxStates));
    }
  }

  int n_states() const noexcept { return n_states_; }

  const Transition& entry(int state, Symbol read) const {
    check_state(state);
    return lookup(state, read);
  }

  void set_entry(int state, Symbol read, Transition t) {
    check_state(state);
    if (t.next > n_states_) throw std::invalid_argument("Machine: next_state exceeds n_states");
    if (static_cast<int>(t.action) >= kActionCount) throw std::invalid_argument("Machine: bad action");
    table_[slot(state, read)] = t;
  }

  Machine& with(int state, Symbol read, Action action, int next) {
    set_entry(state, read, Transition{action, static_cast<std::uint8_t>(next)});
    return *this;
  }

  /// Unchecked lookup for the simulation loop; requires 1 <= state <= n_states.
  const Transition& lookup(int state, Symbol read) const noexcept { return table_[slot(state, read)]; }

  std::span<const Transition> table() const noexcept {
    return {table_.data(), static_cast<std::size_t>(kSymbolCount * n_states_)};
  }

  friend bool operator==(const Machine& a, const Machine& b) noexcept {
    if (a.n_states_ != b.n_states_) return false;
    auto ta = a.table();
    auto tb = b.table();
    return std::equal(ta.begin(), ta.end(), tb.begin());
  }

 private:
  static constexpr std::size_t slot(int state, Symbol read) noexcept {
    return static_cast<std::size_t>(kSymbolCount * (state - 1) + symbol_rank(read));
  }

  void check_state(int state) const {
    if (state < 1 || state > n_states_) throw std::out_of_range("Machine: state out of range");
  }

  int n_states_;
  std::array<Transition, kSymbolCount * kMaxStates> table_{};
};

/// Human-readable transition table, e.g. `1{_:W_>H 0:R>1 1:R>1}`.
inline std::string describe(const Machine& m) {
  static constexpr const char* kSym[] = {"_", "0", "1"};
  static constexpr const char* kAct[] = {"W_", "W0", "W1", "L", "R"};
  std::string out;
  for (int s = 1; s <= m.n_states(); ++s) {
    if (s > 1) out += ' ';
    out += std::to_string(s) + '{';
    for (int r = 0; r < kSymbolCount; ++r) {
      const Transition& t = m.lookup(s, static_cast<Symbol>(r));
      if (r > 0) out += ' ';
      out += kSym[r];
      out += ':';
      out += kAct[static_cast<int>(t.action)];
      out += '>';
      out += t.next == kHaltState ? std::string("H") : std::to_string(t.next);
    }
    out += '}';
  }
  return out;
}

/// Inverse of describe().
inline Machine parse_machine(std::string_view text) {
  auto fail = [&text]() -> Machine { throw std::invalid_argument("parse_machine: malformed description '" + std::string(text) + "'"); };
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t close = text.find('}', pos);
    if (close == std::string_view::npos) return fail();
    blocks.push_back(text.substr(pos, close - pos));
    pos = close + 1;
    if (pos < text.size() && text[pos] == ' ') ++pos;
  }
  if (blocks.empty() || blocks.size() > static_cast<std::size_t>(kMaxStates)) return fail();
  Machine m(static_cast<int>(blocks.size()));
  static constexpr std::string_view kAct[] = {"W_", "W0", "W1", "L", "R"};
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const std::string head = std::to_string(s + 1) + "{";
    std::string_view b = blocks[s];
    if (!b.starts_with(head)) return fail();
    b.remove_prefix(head.size());
    for (int r = 0; r < kSymbolCount; ++r) {
      const std::size_t end = std::min(b.find(' '), b.size());
      const std::string_view e = b.substr(0, end);
      b.remove_prefix(std::min(end + 1, b.size()));
      const std::size_t colon = e.find(':');
      const std::size_t arrow = e.find('>');
      if (colon != 1 || arrow == std::string_view::npos || e[0] != "_01"[r]) return fail();
      const std::string_view act = e.substr(2, arrow - 2);
      const std::string_view next = e.substr(arrow + 1);
      int a = -1;
      for (int j = 0; j < kActionCount; ++j) {
        if (act == kAct[j]) a = j;
      }
      int nx = -1;
      if (next == "H") nx = kHaltState;
      else if (next.size() == 1 && next[0] >= '1' && next[0] <= '9') nx = next[0] - '0';
      if (a < 0 || nx < 0 || nx > m.n_states()) return fail();
      m.set_entry(static_cast<int>(s) + 1, static_cast<Symbol>(r), Transition{static_cast<Action>(a), static_cast<std::uint8_t>(nx)});
    }
    if (!b.empty()) return fail();
  }
  return m;
}

/// Two-way infinite tape; cells never written read as Blank. The buffer is
/// reusable across runs: assign() only clears the region touched since the last
/// assign().
class Tape {
 public:
  Tape() = default;
  explicit Tape(std::string_view input) { assign(input); }

  void assign(std::string_view input) {
    if (dirty_lo_ <= dirty_hi_) {
      std::fill(cells_.begin() + static_cast<std::ptrdiff_t>(index(dirty_lo_)),
                cells_.begin() + static_cast<std::ptrdiff_t>(index(dirty_hi_)) + 1, Symbol::Blank);
    }
    dirty_lo_ = 0;
    dirty_hi_ = static_cast<std::int64_t>(input.size()) - 1;
    if (input.empty()) return;
    reserve_range(0, dirty_hi_);
    Symbol* out = cells_.data() + index(0);
    for (const char ch : input) *out++ = bit_symbol(ch);
  }

  Symbol get(std::int64_t pos) const noexcept {
    const std::int64_t idx = pos + origin_;
    if (idx < 0 || idx >= static_cast<std::int64_t>(cells_.size())) return Symbol::Blank;
    return cells_[static_cast<std::size_t>(idx)];
  }

  void set(std::int64_t pos, Symbol s) {
    if (s == Symbol::Blank && get(pos) == Symbol::Blank) return;
    if (pos + origin_ < 0 || pos + origin_ >= static_cast<std::int64_t>(cells_.size())) reserve_range(pos, pos);
    cells_[index(pos)] = s;
    if (dirty_lo_ > dirty_hi_) {
      dirty_lo_ = dirty_hi_ = pos;
    } else {
      dirty_lo_ = std::min(dirty_lo_, pos);
      dirty_hi_ = std::max(dirty_hi_, pos);
    }
  }

  /// Inclusive range that contains every non-blank cell (may be empty: lo > hi).
  std::int64_t dirty_lo() const noexcept { return dirty_lo_; }
  std::int64_t dirty_hi() const noexcept { return dirty_hi_; }

  /// Equal non-blank content at every position.
  friend bool operator==(const Tape& a, const Tape& b) noexcept {
    const std::int64_t lo = std::min(a.dirty_lo_, b.dirty_lo_);
    const std::int64_t hi = std::max(a.dirty_hi_, b.dirty_hi_);
    for (std::int64_t p = lo; p <= hi; ++p) {
      if (a.get(p) != b.get(p)) return false;
    }
    return true;
  }

 private:
  std::size_t index(std::int64_t pos) const noexcept { return static_cast<std::size_t>(pos + origin_); }

  void reserve_range(std::int64_t lo, std::int64_t hi) {
    const auto size = static_cast<std::int64_t>(cells_.size());
    if (lo + origin_ >= 0 && hi + origin_ < size) return;
    const std::int64_t grow = std::max<std::int64_t>(size, 16);
    std::int64_t new_lo = std::min(lo, -origin_);
    std::int64_t new_hi = std::max(hi, size - origin_ - 1);
    if (lo + origin_ < 0) new_lo -= grow;
    if (hi + origin_ >= size) new_hi += grow;
    std::vector<Symbol> next(static_cast<std::size_t>(new_hi - new_lo + 1), Symbol::Blank);
    for (std::int64_t p = -origin_; p < size - origin_; ++p) next[static_cast<std::size_t>(p - new_lo)] = get(p);
    cells_ = std::move(next);
    origin_ = -new_lo;
  }

  std::vector<Symbol> cells_;
  std::int64_t origin_ = 0;  // cells_[pos + origin_] holds position pos
  std::int64_t dirty_lo_ = 0;
  std::int64_t dirty_hi_ = -1;
};

/// A machine configuration plus the visited interval [lo, hi] and the step count.
struct Config {
  int state = 1;
  std::int64_t head = 0;
  Tape tape;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::uint64_t steps = 0;

  static Config initial(std::string_view input) {
    require_binary(input, "Config::initial");
    Config c;
    c.tape.assign(input);
    return c;
  }

  /// Re-initialise in place, reusing the tape buffer.
  void reset(std::string_view input) {
    state = 1;
    head = 0;
    lo = hi = 0;
    steps = 0;
    tape.assign(input);
  }

  bool halted() const noexcept { return state == kHaltState; }

  /// Same machine-observable configuration (state, head, tape); ignores steps and visited.
  friend bool same_configuration(const Config& a, const Config& b) noexcept {
    return a.state == b.state && a.head == b.head && a.tape == b.tape;
  }
};

/// Applies one transition in place. Requires a non-halted configuration.
inline void advance(const Machine& m, Config& c) {
  const Transition& t = m.lookup(c.state, c.tape.get(c.head));
  switch (t.action) {
    case Action::WriteBlank: c.tape.set(c.head, Symbol::Blank); break;
    case Action::WriteZero: c.tape.set(c.head, Symbol::Zero); break;
    case Action::WriteOne: c.tape.set(c.head, Symbol::One); break;
    case Action::MoveLeft:
      --c.head;
      if (c.head < c.lo) c.lo = c.head;
      break;
    case Action::MoveRight:
      ++c.head;
      if (c.head > c.hi) c.hi = c.head;
      break;
  }
  c.state = t.next;
  ++c.steps;
}

/// Successor configuration. Rejects an already-halted configuration.
inline Config step(const Machine& m, Config c) {
  if (c.state < 1 || c.state > m.n_states()) {
    throw std::invalid_argument("step: configuration is halted or has an invalid state");
  }
  advance(m, c);
  return c;
}

/// Output of a halted configuration: the non-blank cells inside the visited
/// interval must form one contiguous block (or none), read left to right.
/// Returns false (InvalidOutput) otherwise; `out` is cleared either way.
inline bool read_output(const Config& c, std::string& out) {
  out.clear();
  bool ended = false;
  for (std::int64_t p = c.lo; p <= c.hi; ++p) {
    const Symbol s = c.tape.get(p);
    if (s == Symbol::Blank) {
      if (!out.empty()) ended = true;
      continue;
    }
    if (ended) {
      out.clear();
      return false;
    }
    out += s == Symbol::One ? '1' : '0';
  }
  return true;
}

inline std::optional<std::string> halted_output(const Config& c) {
  std::string out;
  if (!read_output(c, out)) return std::nullopt;
  return out;
}

struct Halted {
  std::string output;
  std::uint64_t steps = 0;
  friend bool operator==(const Halted&, const Halted&) = default;
};

struct InvalidOutput {
  std::uint64_t steps = 0;
  friend bool operator==(const InvalidOutput&, const InvalidOutput&) = default;
};

struct Cutoff {
  std::uint64_t budget = 0;
  friend bool operator==(const Cutoff&, const Cutoff&) = default;
};

using RunOutcome = std::variant<Halted, InvalidOutput, Cutoff>;

/// Runs `m` on `input` (written at positions 0..l(input)-1, head at 0, state 1)
/// for at most `budget` transitions. The transition entering the halt state counts.
inline RunOutcome run(const Machine& m, std::string_view input, std::uint64_t budget) {
  if (budget < 1) throw std::invalid_argument("run: budget must be >= 1");
  Config c = Config::initial(input);
  while (c.steps < budget) {
    advance(m, c);
    if (c.halted()) {
      std::string out;
      if (!read_output(c, out)) return InvalidOutput{c.steps};
      return Halted{std::move(out), c.steps};
    }
  }
  return Cutoff{budget};
}

inline bool is_halted_with(const RunOutcome& o, std::string_view x) {
  const auto* h = std::get_if<Halted>(&o);
  return h != nullptr && h->output == x;
}

/// 1-state scanner: moves right over 0/1 and halts (writing Blank) on the first Blank.
/// Copies its input: run(scanner, p, l(p)+1) = Halted(p, l(p)+1).
inline Machine identity_scanner() {
  Machine m(1);
  m.with(1, Symbol::Blank, Action::WriteBlank, kHaltState)
      .with(1, Symbol::Zero, Action::MoveRight, 1)
      .with(1, Symbol::One, Action::MoveRight, 1);
  return m;
}

/// 1-state machine whose every entry is (WriteBlank, halt); index 1 in the enumeration.
inline Machine immediate_halt() { return Machine(1); }

}  // namespace kcw

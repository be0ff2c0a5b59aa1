#pragma once

// Run-length-encoded symbolic simulation used to prove that a machine sweeping
// over ever longer uniform blocks never halts.
//
// A configuration is abstracted as state, head symbol and two stacks of blocks
// (symbol, count), nearest block last; blanks beyond the outermost block are
// implicit. Counts are either constants or x + c for a variable x >= 0. When
// the head reads s in state q and the entry is (Move d, q), the whole run of s
// ahead is crossed in one macro step ("chain step"), which is valid for every
// value of the variable. The same holds when the machine spends several steps
// on one cell before leaving it in the state it arrived in. A proof generalises the counts that changed between
// two concrete configurations of the same shape, simulates symbolically until
// the shape recurs, and accepts if the result is an instance of the start with
// each variable shifted by a constant d >= 0. Any step that cannot be taken
// uniformly for all variable values aborts the proof.

#include <cstdint>
#include <optional>
#include <vector>

#include "kcw/machine.hpp"

namespace kcw::detail {

struct SymCount {
  int var = -1;  // -1: constant
  std::int64_t c = 0;
  friend bool operator==(const SymCount&, const SymCount&) = default;
};

struct SymBlock {
  Symbol sym = Symbol::Blank;
  SymCount count;
  friend bool operator==(const SymBlock&, const SymBlock&) = default;
};

struct SymConfig {
  int state = 1;
  Symbol head = Symbol::Blank;
  std::vector<SymBlock> left;   // back() is adjacent to the head
  std::vector<SymBlock> right;  // back() is adjacent to the head
};

inline bool same_shape(const SymConfig& a, const SymConfig& b) {
  if (a.state != b.state || a.head != b.head) return false;
  if (a.left.size() != b.left.size() || a.right.size() != b.right.size()) return false;
  for (std::size_t j = 0; j < a.left.size(); ++j) {
    if (a.left[j].sym != b.left[j].sym) return false;
  }
  for (std::size_t j = 0; j < a.right.size(); ++j) {
    if (a.right[j].sym != b.right[j].sym) return false;
  }
  return true;
}

/// Canonical run-length form of a concrete configuration (maximal runs, outer blanks dropped).
inline SymConfig to_symbolic(const Config& c) {
  SymConfig g;
  g.state = c.state;
  g.head = c.tape.get(c.head);
  auto push_run = [](std::vector<SymBlock>& side, Symbol s) {
    if (side.empty()) {
      if (s != Symbol::Blank) side.push_back(SymBlock{s, SymCount{-1, 1}});
    } else if (side.back().sym == s) {
      ++side.back().count.c;
    } else {
      side.push_back(SymBlock{s, SymCount{-1, 1}});
    }
  };
  const std::int64_t lo = std::min(c.tape.dirty_lo(), c.head);
  const std::int64_t hi = std::max(c.tape.dirty_hi(), c.head);
  for (std::int64_t p = lo; p < c.head; ++p) push_run(g.left, c.tape.get(p));
  for (std::int64_t p = hi; p > c.head; --p) push_run(g.right, c.tape.get(p));
  return g;
}

enum class SymResult { Ok, Fail, Diverges };

inline bool add_count(SymCount& into, const SymCount& more) {
  if (into.var >= 0 && more.var >= 0) return false;
  if (more.var >= 0) into.var = more.var;
  into.c += more.c;
  return true;
}

struct CellChain {
  Symbol write = Symbol::Blank;
  bool right = false;
};

// Runs T on a lone cell holding s in state q. If the head leaves the cell in
// state q again without halting, every run of s ahead can be crossed the same
// way, each cell turning into `write`.
inline std::optional<CellChain> cell_chain(const Machine& m, int q, Symbol s) {
  int state = q;
  Symbol cur = s;
  for (int k = 0; k <= kSymbolCount * kMaxStates; ++k) {
    const Transition& t = m.lookup(state, cur);
    if (t.next == kHaltState) return std::nullopt;
    switch (t.action) {
      case Action::WriteBlank: cur = Symbol::Blank; break;
      case Action::WriteZero: cur = Symbol::Zero; break;
      case Action::WriteOne: cur = Symbol::One; break;
      case Action::MoveLeft:
      case Action::MoveRight:
        if (t.next != q) return std::nullopt;
        return CellChain{cur, t.action == Action::MoveRight};
    }
    state = t.next;
  }
  return std::nullopt;
}

inline SymResult sym_step(const Machine& m, SymConfig& g) {
  auto leave = [&g](bool right, Symbol written, SymCount moved) {
    auto& behind = right ? g.left : g.right;
    auto& ahead = right ? g.right : g.left;
    if (behind.empty() && written == Symbol::Blank) {
      // merges into the implicit blank region
    } else if (!behind.empty() && behind.back().sym == written) {
      if (!add_count(behind.back().count, moved)) return SymResult::Fail;
    } else {
      behind.push_back(SymBlock{written, moved});
    }
    if (ahead.empty()) {
      g.head = Symbol::Blank;
    } else {
      SymBlock& b = ahead.back();
      if (b.count.c < 1) return SymResult::Fail;
      g.head = b.sym;
      --b.count.c;
      if (b.count.c == 0 && b.count.var < 0) ahead.pop_back();
    }
    return SymResult::Ok;
  };

  if (const auto chain = cell_chain(m, g.state, g.head)) {
    auto& ahead = chain->right ? g.right : g.left;
    SymCount moved{-1, 1};
    if (!ahead.empty() && ahead.back().sym == g.head) {
      if (!add_count(moved, ahead.back().count)) return SymResult::Fail;
      ahead.pop_back();
    }
    if (ahead.empty() && g.head == Symbol::Blank) return SymResult::Diverges;
    return leave(chain->right, chain->write, moved);
  }

  const Transition& t = m.lookup(g.state, g.head);
  if (t.next == kHaltState) return SymResult::Fail;
  switch (t.action) {
    case Action::WriteBlank: g.head = Symbol::Blank; break;
    case Action::WriteZero: g.head = Symbol::Zero; break;
    case Action::WriteOne: g.head = Symbol::One; break;
    case Action::MoveLeft:
    case Action::MoveRight:
      if (const SymResult r = leave(t.action == Action::MoveRight, g.head, SymCount{-1, 1}); r != SymResult::Ok) return r;
      break;
  }
  g.state = t.next;
  return SymResult::Ok;
}

// `later` equals `start` with every variable x replaced by x + d, d >= 0.
inline bool is_shifted_instance(const SymConfig& later, const SymConfig& start) {
  if (!same_shape(later, start)) return false;
  auto blocks_ok = [](const std::vector<SymBlock>& a, const std::vector<SymBlock>& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const SymCount& x = a[j].count;
      const SymCount& y = b[j].count;
      if (x.var != y.var) return false;
      if (y.var < 0 ? x.c != y.c : x.c < y.c) return false;
    }
    return true;
  };
  return blocks_ok(later.left, start.left) && blocks_ok(later.right, start.right);
}

/// True when the configurations `first` and `second` (same shape, taken from one
/// run) prove that the run never halts.
inline bool prove_by_induction(const Machine& m, const SymConfig& first, const SymConfig& second,
                               std::uint64_t max_macro_steps) {
  if (!same_shape(first, second)) return false;
  SymConfig start = first;
  int vars = 0;
  auto generalise = [&vars](std::vector<SymBlock>& a, const std::vector<SymBlock>& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j].count.c != b[j].count.c) a[j].count.var = vars++;
    }
  };
  generalise(start.left, second.left);
  generalise(start.right, second.right);
  if (vars == 0) return false;

  SymConfig g = start;
  for (std::uint64_t k = 0; k < max_macro_steps; ++k) {
    switch (sym_step(m, g)) {
      case SymResult::Fail: return false;
      case SymResult::Diverges: return true;
      case SymResult::Ok: break;
    }
    if (is_shifted_instance(g, start)) return true;
  }
  return false;
}

}  // namespace kcw::detail

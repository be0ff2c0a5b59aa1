#pragma once

// Certified halting verdicts at a finite budget and exhaustive maximum-step
// tables for small state counts.
//
// Two divergence certificates are produced, both replayable:
//  * ConfigCycle: the full configuration at two different steps is identical.
//    Snapshots are taken at steps 0, 1, 2, 4, 8, ... and every later
//    configuration is compared exactly against the latest snapshot (Brent).
//  * BlankEscape: at two steps the machine is in the same state on a fresh
//    frontier cell beyond which the tape is entirely blank, further out the
//    second time. In between the head never fell more than `window` cells
//    behind the first frontier, and the `window` cells behind the head are
//    identical at both steps. The computation from the second step is then the
//    first segment shifted by the displacement, forever. With window 0 this is
//    a state whose Blank entry is (MoveRight, same state) or the mirror image.
//  * InductiveCycle: two frontier configurations of the same run-length shape
//    whose growth is shown to repeat forever by symbolic simulation (see
//    induction.hpp). Catches machines bouncing over a growing block.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kcw/enumeration.hpp"
#include "kcw/induction.hpp"
#include "kcw/machine.hpp"
#include "kcw/parallel.hpp"

namespace kcw {

struct ConfigCycle {
  std::uint64_t first_step = 0;
  std::uint64_t second_step = 0;
  friend bool operator==(const ConfigCycle&, const ConfigCycle&) = default;
};

struct BlankEscape {
  int state = 1;
  int direction = +1;  // +1 runs off to the right, -1 to the left
  std::uint64_t exit_step = 0;
  std::int64_t exit_position = 0;
  std::uint64_t repeat_step = 0;
  std::int64_t repeat_position = 0;
  int window = 0;  // cells behind the frontier that the segment may read
  friend bool operator==(const BlankEscape&, const BlankEscape&) = default;
};

struct InductiveCycle {
  std::uint64_t first_step = 0;
  std::uint64_t second_step = 0;
  friend bool operator==(const InductiveCycle&, const InductiveCycle&) = default;
};

using Certificate = std::variant<ConfigCycle, BlankEscape, InductiveCycle>;

struct ProvedHalts {
  std::uint64_t steps = 0;
  std::optional<std::string> output;  // nullopt: halted with an invalid output
  friend bool operator==(const ProvedHalts&, const ProvedHalts&) = default;
};

struct ProvedDiverges {
  Certificate certificate;
  friend bool operator==(const ProvedDiverges&, const ProvedDiverges&) = default;
};

struct Unknown {
  std::uint64_t budget = 0;
  friend bool operator==(const Unknown&, const Unknown&) = default;
};

using HaltingVerdict = std::variant<ProvedHalts, ProvedDiverges, Unknown>;

enum class VerdictStatus : std::uint8_t { Halted, HaltedInvalid, Diverges, Unknown };
enum class CertificateKind : std::uint8_t { None, ConfigCycle, BlankEscape, InductiveCycle };

/// Flat form of a verdict, as stored in the cache. `steps` is the halting step
/// count, the step at which divergence was certified, or the budget.
struct VerdictSummary {
  VerdictStatus status = VerdictStatus::Unknown;
  std::uint64_t steps = 0;
  CertificateKind kind = CertificateKind::None;
  std::string output;

  bool halted_with_output() const noexcept { return status == VerdictStatus::Halted; }

  friend bool operator==(const VerdictSummary&, const VerdictSummary&) = default;
};

/// Macro-step allowance for an induction proof between two recorded steps.
constexpr std::uint64_t induction_step_limit(std::uint64_t first, std::uint64_t second) {
  return 2 * (second - first) + 16;
}

/// Reusable analysis workspace; one per thread in sweeps.
class Analyzer {
 public:
  /// Longest look-back a BlankEscape certificate may use.
  static constexpr int kMaxWindow = 32;
  /// Frontier events remembered per direction.
  static constexpr std::size_t kHistory = 16;
  /// Run-length shapes remembered per direction for induction proofs.
  static constexpr std::size_t kShapeHistory = 4;
  /// Induction is only attempted after this many steps; cheaper checks come first.
  static constexpr std::uint64_t kInductionAfter = 32;
  /// Steps simulated without detectors before the full analysis starts over.
  static constexpr std::uint64_t kQuickSteps = 16;

  const VerdictSummary& analyze(const Machine& m, std::string_view input, std::uint64_t budget) {
    if (budget < 1) throw std::invalid_argument("analyze: budget must be >= 1");
    summary_ = VerdictSummary{};
    certificate_.reset();
    // Most runs halt within a few steps; try a bare simulation before setting up the detectors.
    cfg_.reset(input);
    const std::uint64_t quick = std::min(budget, kQuickSteps);
    while (cfg_.steps < quick) {
      advance(m, cfg_);
      if (cfg_.halted()) return finish_halted();
    }
    input_.assign(input.begin(), input.end());
    cfg_.reset(input);
    machine_ = &m;
    for (auto& side : sides_) side = Side{};
    for (auto& shapes : shapes_) shapes.clear();
    take_snapshot();
    const auto len = static_cast<std::int64_t>(input_.size());
    if (len == 0) {
      if (frontier_event(0) || frontier_event(1)) return summary_;
    }

    while (cfg_.steps < budget) {
      const std::int64_t old_lo = cfg_.lo;
      const std::int64_t old_hi = cfg_.hi;
      advance(m, cfg_);
      if (cfg_.halted()) return finish_halted();
      sides_[0].lowest = std::min(sides_[0].lowest, cfg_.head);
      sides_[1].lowest = std::min(sides_[1].lowest, -cfg_.head);
      if (cfg_.hi > old_hi && cfg_.head >= len) {
        if (frontier_event(0)) return summary_;
      } else if (cfg_.lo < old_lo) {
        if (frontier_event(1)) return summary_;
      }
      if (check_cycle()) return summary_;
      if ((cfg_.steps & (cfg_.steps - 1)) == 0) take_snapshot();
    }
    summary_.status = VerdictStatus::Unknown;
    summary_.steps = budget;
    return summary_;
  }

  const VerdictSummary& summary() const noexcept { return summary_; }

  /// Present after a Diverges verdict.
  const std::optional<Certificate>& certificate() const noexcept { return certificate_; }

  HaltingVerdict verdict() const {
    switch (summary_.status) {
      case VerdictStatus::Halted: return ProvedHalts{summary_.steps, summary_.output};
      case VerdictStatus::HaltedInvalid: return ProvedHalts{summary_.steps, std::nullopt};
      case VerdictStatus::Diverges: return ProvedDiverges{*certificate_};
      case VerdictStatus::Unknown: break;
    }
    return Unknown{summary_.steps};
  }

 private:
  // Positions are handled in direction-normalised coordinates u = dir * pos,
  // so "ahead" is always larger u.
  struct FrontierRecord {
    int state = 0;
    std::int64_t u = 0;
    std::uint64_t step = 0;
    std::int64_t lowest_before = 0;  // min u between the previous record and this one
    std::array<Symbol, kMaxWindow> behind{};
  };

  struct Side {
    std::array<FrontierRecord, kHistory> ring{};
    std::size_t count = 0;
    std::size_t newest = 0;
    std::int64_t lowest = 0;  // min u since the newest record
  };

  const VerdictSummary& finish_halted() {
    summary_.steps = cfg_.steps;
    summary_.status = read_output(cfg_, summary_.output) ? VerdictStatus::Halted : VerdictStatus::HaltedInvalid;
    return summary_;
  }

  static constexpr int dir_of(int side) noexcept { return side == 0 ? +1 : -1; }

  // The head sits on a fresh frontier cell with only blanks beyond it.
  bool frontier_event(int side_id) {
    Side& side = sides_[static_cast<std::size_t>(side_id)];
    const int dir = dir_of(side_id);
    const std::int64_t u_now = dir * cfg_.head;
    std::int64_t lowest = side.count == 0 ? u_now : side.lowest;
    for (std::size_t j = 0; j < side.count; ++j) {
      const FrontierRecord& r = side.ring[(side.newest + kHistory - j) % kHistory];
      if (r.state == cfg_.state) {
        const std::int64_t window = std::max<std::int64_t>(0, r.u - lowest);
        if (window <= kMaxWindow && same_behind(r, static_cast<int>(window), dir)) {
          certificate_ = BlankEscape{cfg_.state, dir, r.step, dir * r.u, cfg_.steps, cfg_.head, static_cast<int>(window)};
          summary_.status = VerdictStatus::Diverges;
          summary_.kind = CertificateKind::BlankEscape;
          summary_.steps = cfg_.steps;
          return true;
        }
      }
      lowest = std::min(lowest, r.lowest_before);
    }
    side.newest = side.count == 0 ? 0 : (side.newest + 1) % kHistory;
    side.count = std::min(side.count + 1, kHistory);
    FrontierRecord& rec = side.ring[side.newest];
    rec.state = cfg_.state;
    rec.u = u_now;
    rec.step = cfg_.steps;
    rec.lowest_before = side.lowest;
    for (int j = 1; j <= kMaxWindow; ++j) rec.behind[static_cast<std::size_t>(j - 1)] = cfg_.tape.get(cfg_.head - dir * j);
    side.lowest = u_now;
    return cfg_.steps >= kInductionAfter && induction_event(side_id);
  }

  bool induction_event(int side_id) {
    auto& shapes = shapes_[static_cast<std::size_t>(side_id)];
    detail::SymConfig now = detail::to_symbolic(cfg_);
    for (auto it = shapes.rbegin(); it != shapes.rend(); ++it) {
      if (!detail::same_shape(it->config, now)) continue;
      if (detail::prove_by_induction(*machine_, it->config, now, induction_step_limit(it->step, cfg_.steps))) {
        certificate_ = InductiveCycle{it->step, cfg_.steps};
        summary_.status = VerdictStatus::Diverges;
        summary_.kind = CertificateKind::InductiveCycle;
        summary_.steps = cfg_.steps;
        return true;
      }
    }
    if (shapes.size() == kShapeHistory) shapes.erase(shapes.begin());
    shapes.push_back(ShapeRecord{cfg_.steps, std::move(now)});
    return false;
  }

  bool same_behind(const FrontierRecord& r, int window, int dir) const noexcept {
    for (int j = 1; j <= window; ++j) {
      if (r.behind[static_cast<std::size_t>(j - 1)] != cfg_.tape.get(cfg_.head - dir * j)) return false;
    }
    return true;
  }

  Symbol initial_symbol(std::int64_t pos) const noexcept {
    if (pos < 0 || pos >= static_cast<std::int64_t>(input_.size())) return Symbol::Blank;
    return bit_symbol(input_[static_cast<std::size_t>(pos)]);
  }

  void take_snapshot() {
    snap_state_ = cfg_.state;
    snap_head_ = cfg_.head;
    snap_lo_ = cfg_.lo;
    snap_step_ = cfg_.steps;
    snap_cells_.clear();
    for (std::int64_t p = cfg_.lo; p <= cfg_.hi; ++p) snap_cells_.push_back(cfg_.tape.get(p));
  }

  // Cells outside a visited interval still hold their initial symbols, so the
  // comparison only needs the current (larger) visited interval.
  bool check_cycle() {
    if (cfg_.state != snap_state_ || cfg_.head != snap_head_) return false;
    const auto snap_hi = snap_lo_ + static_cast<std::int64_t>(snap_cells_.size()) - 1;
    for (std::int64_t p = cfg_.lo; p <= cfg_.hi; ++p) {
      const Symbol then = (p >= snap_lo_ && p <= snap_hi) ? snap_cells_[static_cast<std::size_t>(p - snap_lo_)] : initial_symbol(p);
      if (cfg_.tape.get(p) != then) return false;
    }
    certificate_ = ConfigCycle{snap_step_, cfg_.steps};
    summary_.status = VerdictStatus::Diverges;
    summary_.kind = CertificateKind::ConfigCycle;
    summary_.steps = cfg_.steps;
    return true;
  }

  struct ShapeRecord {
    std::uint64_t step = 0;
    detail::SymConfig config;
  };

  const Machine* machine_ = nullptr;
  std::array<std::vector<ShapeRecord>, 2> shapes_;
  std::string input_;
  Config cfg_;
  VerdictSummary summary_;
  std::optional<Certificate> certificate_;
  std::array<Side, 2> sides_{};
  int snap_state_ = 1;
  std::int64_t snap_head_ = 0;
  std::int64_t snap_lo_ = 0;
  std::uint64_t snap_step_ = 0;
  std::vector<Symbol> snap_cells_;
};

/// Certified verdict for `m` on `input` within `budget` steps. ProvedHalts and
/// ProvedDiverges are never wrong; Unknown means neither was established.
inline HaltingVerdict analyze(const Machine& m, std::string_view input, std::uint64_t budget) {
  require_binary(input, "analyze");
  Analyzer a;
  a.analyze(m, input, budget);
  return a.verdict();
}

namespace detail {

// Replays to `target` steps; false if the machine halts first.
inline bool replay_to(const Machine& m, Config& c, std::uint64_t target) {
  while (c.steps < target) {
    if (c.halted()) return false;
    advance(m, c);
  }
  return !c.halted();
}

inline bool blank_beyond(const Config& c, std::int64_t pos, int direction) {
  if (direction > 0) {
    for (std::int64_t p = pos; p <= c.tape.dirty_hi(); ++p) {
      if (c.tape.get(p) != Symbol::Blank) return false;
    }
  } else {
    for (std::int64_t p = c.tape.dirty_lo(); p <= pos; ++p) {
      if (c.tape.get(p) != Symbol::Blank) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Re-checks a divergence certificate by fresh simulation, independently of the
/// bookkeeping that produced it.
inline bool verify_certificate(const Machine& m, std::string_view input, const Certificate& cert) {
  Config c = Config::initial(input);
  if (const auto* cyc = std::get_if<ConfigCycle>(&cert)) {
    if (cyc->first_step >= cyc->second_step) return false;
    if (!detail::replay_to(m, c, cyc->first_step)) return false;
    const Config first = c;
    if (!detail::replay_to(m, c, cyc->second_step)) return false;
    return same_configuration(first, c);
  }
  if (const auto* ind = std::get_if<InductiveCycle>(&cert)) {
    if (ind->first_step >= ind->second_step) return false;
    if (!detail::replay_to(m, c, ind->first_step)) return false;
    const detail::SymConfig first = detail::to_symbolic(c);
    if (!detail::replay_to(m, c, ind->second_step)) return false;
    return detail::prove_by_induction(m, first, detail::to_symbolic(c),
                                      induction_step_limit(ind->first_step, ind->second_step));
  }
  const auto& esc = std::get<BlankEscape>(cert);
  const int dir = esc.direction;
  if (dir != 1 && dir != -1) return false;
  if (esc.window < 0 || esc.exit_step >= esc.repeat_step) return false;
  if ((esc.repeat_position - esc.exit_position) * dir <= 0) return false;
  if (!detail::replay_to(m, c, esc.exit_step)) return false;
  if (c.state != esc.state || c.head != esc.exit_position) return false;
  if (!detail::blank_beyond(c, esc.exit_position, dir)) return false;
  std::vector<Symbol> behind;
  for (int j = 1; j <= esc.window; ++j) behind.push_back(c.tape.get(esc.exit_position - dir * j));
  while (c.steps < esc.repeat_step) {
    advance(m, c);
    if (c.halted()) return false;
    if ((c.head - esc.exit_position) * dir < -esc.window) return false;
  }
  if (c.state != esc.state || c.head != esc.repeat_position) return false;
  if (!detail::blank_beyond(c, esc.repeat_position, dir)) return false;
  for (int j = 1; j <= esc.window; ++j) {
    if (behind[static_cast<std::size_t>(j - 1)] != c.tape.get(esc.repeat_position - dir * j)) return false;
  }
  return true;
}

inline bool verify_certificate(const Machine& m, std::string_view input, const ProvedDiverges& d) {
  return verify_certificate(m, input, d.certificate);
}

/// Maximum-step record over every n-state machine started on the empty tape.
struct BBRecord {
  int n_states = 1;
  std::uint64_t max_steps = 0;
  bool decided_all = false;
  std::uint64_t undecided_count = 0;
  std::uint64_t budget_used = 0;
  std::uint64_t machines = 0;
  std::uint64_t halting = 0;
  std::uint64_t diverging = 0;
  std::uint64_t cycle_certificates = 0;
  std::uint64_t escape_certificates = 0;
  std::uint64_t induction_certificates = 0;
  std::uint64_t certificate_failures = 0;  // only counted with verify_certificates
  std::optional<MachineIndex> champion;   // smallest index reaching max_steps

  friend bool operator==(const BBRecord&, const BBRecord&) = default;
};

struct BBOptions {
  unsigned threads = 1;
  bool verify_certificates = false;
  std::uint64_t chunk_size = 1 << 14;
};

namespace detail {

struct BBPartial {
  BBRecord rec;
  std::vector<std::uint64_t> undecided;
};

inline void merge_bb(BBPartial& acc, BBPartial&& part) {
  // Chunks arrive in index order, so on a tie the earlier champion is the smaller index.
  if (part.rec.champion && (!acc.rec.champion || part.rec.max_steps > acc.rec.max_steps)) {
    acc.rec.max_steps = part.rec.max_steps;
    acc.rec.champion = part.rec.champion;
  }
  acc.rec.machines += part.rec.machines;
  acc.rec.halting += part.rec.halting;
  acc.rec.diverging += part.rec.diverging;
  acc.rec.cycle_certificates += part.rec.cycle_certificates;
  acc.rec.escape_certificates += part.rec.escape_certificates;
  acc.rec.induction_certificates += part.rec.induction_certificates;
  acc.rec.certificate_failures += part.rec.certificate_failures;
  acc.rec.undecided_count += part.rec.undecided_count;
  acc.undecided.insert(acc.undecided.end(), part.undecided.begin(), part.undecided.end());
}

template <class IndexAt>
BBPartial bb_pass(std::uint64_t count, IndexAt index_at, std::uint64_t budget, const BBOptions& opt) {
  const std::uint64_t chunk = std::max<std::uint64_t>(1, opt.chunk_size);
  const std::uint64_t n_chunks = (count + chunk - 1) / chunk;
  return ordered_reduce(
      n_chunks, opt.threads, BBPartial{},
      [&](std::uint64_t c) {
        BBPartial part;
        Analyzer an;
        const std::uint64_t end = std::min(count, (c + 1) * chunk);
        for (std::uint64_t j = c * chunk; j < end; ++j) {
          const std::uint64_t i = index_at(j);
          const Machine m = index_to_machine(MachineIndex{i});
          const VerdictSummary& v = an.analyze(m, "", budget);
          ++part.rec.machines;
          switch (v.status) {
            case VerdictStatus::Halted:
            case VerdictStatus::HaltedInvalid:
              ++part.rec.halting;
              if (v.steps > part.rec.max_steps) {
                part.rec.max_steps = v.steps;
                part.rec.champion = MachineIndex{i};
              }
              break;
            case VerdictStatus::Diverges:
              ++part.rec.diverging;
              if (v.kind == CertificateKind::ConfigCycle) ++part.rec.cycle_certificates;
              else if (v.kind == CertificateKind::BlankEscape) ++part.rec.escape_certificates;
              else ++part.rec.induction_certificates;
              if (opt.verify_certificates && !verify_certificate(m, "", *an.certificate())) ++part.rec.certificate_failures;
              break;
            case VerdictStatus::Unknown:
              ++part.rec.undecided_count;
              part.undecided.push_back(i);
              break;
          }
        }
        return part;
      },
      [](BBPartial& acc, BBPartial&& part) { merge_bb(acc, std::move(part)); });
}

inline std::pair<std::uint64_t, std::uint64_t> bb_span(int n, const MachineRange& range) {
  if (n < 1 || n > kMaxStates) throw std::invalid_argument("bb_table: n out of range");
  if (n < range.min_states || n > range.max_states) throw std::invalid_argument("bb_table: n outside the machine range");
  const std::uint64_t first = std::max(index_offset(n) + 1, range.first());
  const std::uint64_t last = std::min(index_offset(n + 1), range.last());
  return {first, last};
}

inline BBRecord finish(BBRecord rec, int n, std::uint64_t budget) {
  rec.n_states = n;
  rec.budget_used = budget;
  rec.decided_all = rec.undecided_count == 0;
  return rec;
}

}  // namespace detail

/// Runs analyze on every n-state machine of `range` with empty input.
inline BBRecord bb_table(int n, std::uint64_t budget, const MachineRange& range, const BBOptions& opt = {}) {
  if (budget < 1) throw std::invalid_argument("bb_table: budget must be >= 1");
  const auto [first, last] = detail::bb_span(n, range);
  const std::uint64_t count = last >= first ? last - first + 1 : 0;
  auto part = detail::bb_pass(count, [first = first](std::uint64_t j) { return first + j; }, budget, opt);
  return detail::finish(part.rec, n, budget);
}

/// bb_table at budgets start, 2 start, 4 start, ... up to max_budget, stopping
/// as soon as every machine is decided. Each round only re-analyzes machines
/// still undecided, so the result equals bb_table at the final budget.
inline BBRecord bb_search(int n, std::uint64_t start_budget, std::uint64_t max_budget, const MachineRange& range,
                          const BBOptions& opt = {}) {
  if (start_budget < 1 || max_budget < start_budget) throw std::invalid_argument("bb_search: bad budget bounds");
  const auto [first, last] = detail::bb_span(n, range);
  const std::uint64_t count = last >= first ? last - first + 1 : 0;
  std::uint64_t budget = start_budget;
  auto acc = detail::bb_pass(count, [first = first](std::uint64_t j) { return first + j; }, budget, opt);
  while (acc.rec.undecided_count > 0 && budget < max_budget) {
    budget = std::min(max_budget, budget * 2);
    std::vector<std::uint64_t> todo = std::move(acc.undecided);
    acc.undecided.clear();
    acc.rec.undecided_count = 0;
    acc.rec.machines -= todo.size();
    auto part = detail::bb_pass(todo.size(), [&todo](std::uint64_t j) { return todo[j]; }, budget, opt);
    // Re-analyzed machines arrive after the first pass, so ties need an explicit index comparison.
    if (part.rec.max_steps == acc.rec.max_steps && part.rec.champion && acc.rec.champion &&
        part.rec.champion->value < acc.rec.champion->value) {
      acc.rec.champion = part.rec.champion;
    }
    detail::merge_bb(acc, std::move(part));
  }
  return detail::finish(acc.rec, n, budget);
}

}  // namespace kcw

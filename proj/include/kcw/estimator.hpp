#pragma once

// Anytime upper bounds on plain complexity: phi(t, x) is the length of the
// shortest U-program of length at most l(x)+c that prints x within t steps,
// and the applicable-set construction bounds C(x) by the shortest encoded
// (index, program) pair. Every reported value comes with a replayable witness.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "kcw/errors.hpp"
#include "kcw/sweep.hpp"
#include "kcw/universal.hpp"

namespace kcw {

/// Default cap l(x) + c.
inline int default_cap(std::string_view x) { return static_cast<int>(x.size()) + length_constant(); }

struct EstimatorOptions {
  MachineRange universe = default_universe();
  std::optional<int> cap;                          // replaces l(x)+c for every target
  long double max_programs = 4194304.0L;           // pairs one sweep may enumerate (2^22)
  std::uint64_t max_pairs = std::uint64_t{1} << 22;  // pairs a materialised applicable set may hold
  SweepOptions sweep;
};

struct PhiResult {
  std::string x;
  std::uint64_t t = 1;
  int value = 0;
  int cap = 0;
  std::optional<std::string> witness;
  std::uint64_t witness_steps = 0;

  friend bool operator==(const PhiResult&, const PhiResult&) = default;
};

namespace detail {

inline void require_schedule(std::span<const std::uint64_t> schedule) {
  if (schedule.empty()) throw std::invalid_argument("phi_profile: empty schedule");
  if (schedule.front() < 1) throw std::invalid_argument("phi_profile: budgets must be >= 1");
  for (std::size_t j = 1; j < schedule.size(); ++j) {
    if (schedule[j] <= schedule[j - 1]) throw std::invalid_argument("phi_profile: schedule must be strictly increasing");
  }
}

inline void require_ceiling(long double requested, long double ceiling, const char* what) {
  if (requested > ceiling) {
    throw ResourceLimitError(std::string(what) + ": " + std::to_string(static_cast<double>(requested)) +
                                 " programs exceed the ceiling of " + std::to_string(static_cast<double>(ceiling)) +
                                 "; shrink the universe or the cap",
                             requested, ceiling);
  }
}

// Shortest program so far for one target; ties go to the numerically smaller
// program, which for equal lengths means fewer leading ones, then smaller i, then smaller p.
struct PhiBest {
  bool found = false;
  int length = 0;
  int k = 0;
  std::uint64_t i = 0;
  std::uint64_t pval = 0;
  int plen = 0;
  std::uint64_t steps = 0;

  auto order() const { return std::tie(length, k, i, pval); }
};

inline void improve(PhiBest& acc, const PhiBest& cand) {
  if (!cand.found) return;
  if (!acc.found || cand.order() < acc.order()) acc = cand;
}

}  // namespace detail

/// Number of structurally valid U-programs (decodable, index inside `universe`)
/// of length at most `cap`; this is what a phi sweep enumerates.
inline long double phi_program_count(const MachineRange& universe, int cap) {
  return count_pairs(universe, [cap](int k) { return LengthBand{0, cap - 2 * k - 1}; });
}

/// phi for every target at every budget of `schedule`, indexed [target][budget].
/// Each budget is an independent sweep. Throws InternalError if a profile ever
/// increases with the budget.
inline std::vector<std::vector<PhiResult>> phi_profiles(std::span<const std::string> xs, std::span<const std::uint64_t> schedule,
                                                        const EstimatorOptions& opt = {}) {
  detail::require_schedule(schedule);
  opt.universe.validate();
  const TargetSet targets(xs);
  std::vector<int> caps(targets.size());
  int max_cap = 0;
  for (std::size_t s = 0; s < targets.size(); ++s) {
    caps[s] = opt.cap.value_or(default_cap(targets[s]));
    if (caps[s] < 0 || caps[s] > 63) throw std::invalid_argument("phi: cap must lie in [0, 63]");
    max_cap = std::max(max_cap, caps[s]);
  }
  detail::require_ceiling(phi_program_count(opt.universe, max_cap), opt.max_programs, "phi");

  std::vector<std::vector<detail::PhiBest>> per_budget;
  for (const std::uint64_t t : schedule) {
    auto best = sweep_pairs(
        opt.universe, t, [max_cap](int k) { return LengthBand{0, max_cap - 2 * k - 1}; },
        std::vector<detail::PhiBest>(targets.size()),
        [&targets, &caps](std::vector<detail::PhiBest>& acc, const PairView& v) {
          if (!v.verdict.halted_with_output()) return;
          const int slot = targets.find(v.verdict.output);
          if (slot < 0) return;
          const int plen = static_cast<int>(v.program.size());
          const int length = 2 * v.index_bits + 1 + plen;
          if (length > caps[static_cast<std::size_t>(slot)]) return;
          detail::improve(acc[static_cast<std::size_t>(slot)],
                          detail::PhiBest{true, length, v.index_bits, v.index, v.program_value, plen, v.verdict.steps});
        },
        [](std::vector<detail::PhiBest>& acc, std::vector<detail::PhiBest>&& part) {
          for (std::size_t s = 0; s < acc.size(); ++s) detail::improve(acc[s], part[s]);
        },
        opt.sweep);
    per_budget.push_back(std::move(best));
  }

  std::vector<std::vector<PhiResult>> out;
  out.reserve(xs.size());
  for (const std::string& x : xs) {
    const auto slot = static_cast<std::size_t>(targets.find(x));
    std::vector<PhiResult> profile;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
      const detail::PhiBest& b = per_budget[j][slot];
      PhiResult r{x, schedule[j], caps[slot], caps[slot], std::nullopt, 0};
      if (b.found) {
        r.value = b.length;
        r.witness = encode_index(b.i) + to_bits(b.pval, b.plen);
        r.witness_steps = b.steps;
      }
      if (!profile.empty() && r.value > profile.back().value) {
        throw InternalError("phi profile for '" + x + "' increased from " + std::to_string(profile.back().value) + " to " +
                            std::to_string(r.value) + " at budget " + std::to_string(r.t));
      }
      profile.push_back(std::move(r));
    }
    out.push_back(std::move(profile));
  }
  return out;
}

inline std::vector<PhiResult> phi_profile(std::string_view x, std::span<const std::uint64_t> schedule, const EstimatorOptions& opt = {}) {
  const std::string target(x);
  return phi_profiles(std::span<const std::string>(&target, 1), schedule, opt).front();
}

inline PhiResult phi(std::uint64_t t, std::string_view x, const EstimatorOptions& opt = {}) {
  if (t < 1) throw std::invalid_argument("phi: budget must be >= 1");
  return phi_profile(x, std::span<const std::uint64_t>(&t, 1), opt).front();
}

/// 1, 2, 4, ... up to and including `budget`.
inline std::vector<std::uint64_t> doubling_schedule(std::uint64_t budget) {
  if (budget < 1) throw std::invalid_argument("doubling_schedule: budget must be >= 1");
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 1; t < budget; t *= 2) out.push_back(t);
  out.push_back(budget);
  return out;
}

/// A profile point whose value drops again when the budget is quadrupled.
struct Overshoot {
  std::string x;
  std::uint64_t t = 0;
  int value_t = 0;
  int value_4t = 0;
  std::string witness_4t;
};

/// Every (x, t) in the profiles with value(t) > value(4t), where 4t is also scheduled.
inline std::vector<Overshoot> find_overshoots(const std::vector<std::vector<PhiResult>>& profiles) {
  std::vector<Overshoot> out;
  for (const auto& profile : profiles) {
    for (const PhiResult& a : profile) {
      for (const PhiResult& b : profile) {
        if (b.t == 4 * a.t && b.value < a.value) out.push_back(Overshoot{a.x, a.t, a.value, b.value, b.witness.value_or("")});
      }
    }
  }
  return out;
}

struct ProgramPair {
  MachineIndex i;
  std::string p;
  int cost = 0;         // l(b(i)) + l(p)
  int encoded_len = 0;  // 2 l(b(i)) + 1 + l(p)
  std::uint64_t steps = 0;

  int min_part() const noexcept { return std::min(bit_length(i.value), static_cast<int>(p.size())); }

  friend bool operator==(const ProgramPair&, const ProgramPair&) = default;
};

inline ProgramPair make_program_pair(std::uint64_t i, std::string p, std::uint64_t steps) {
  const int k = bit_length(i);
  const int len = static_cast<int>(p.size());
  return ProgramPair{MachineIndex{i}, std::move(p), k + len, 2 * k + 1 + len, steps};
}

/// Which pairs survive pruning of an applicable set.
///  * DiscardDominated: drop a pair when some pair of the set costs no more than
///    the smaller of its two parts.
///  * LiteralSetDifference: drop a pair when its own cost is at most the smaller
///    part of some pair of the set.
///  * KeepAll: no pruning.
enum class PruningPolicy { DiscardDominated, LiteralSetDifference, KeepAll };

inline const char* policy_name(PruningPolicy p) {
  switch (p) {
    case PruningPolicy::DiscardDominated: return "discard-dominated";
    case PruningPolicy::LiteralSetDifference: return "literal-set-difference";
    case PruningPolicy::KeepAll: return "keep-all";
  }
  return "discard-dominated";
}

inline PruningPolicy parse_policy(std::string_view s) {
  if (s == "discard-dominated") return PruningPolicy::DiscardDominated;
  if (s == "literal-set-difference") return PruningPolicy::LiteralSetDifference;
  if (s == "keep-all") return PruningPolicy::KeepAll;
  throw std::invalid_argument("unknown pruning policy '" + std::string(s) + "'");
}

/// Set-wide quantities the pruning predicates depend on.
struct PruneContext {
  int min_cost = INT_MAX;
  int max_min_part = -1;

  void add(int cost, int min_part) noexcept {
    min_cost = std::min(min_cost, cost);
    max_min_part = std::max(max_min_part, min_part);
  }
};

inline bool keeps(PruningPolicy policy, int cost, int min_part, const PruneContext& ctx) noexcept {
  switch (policy) {
    case PruningPolicy::DiscardDominated: return min_part < ctx.min_cost;
    case PruningPolicy::LiteralSetDifference: return cost > ctx.max_min_part;
    case PruningPolicy::KeepAll: return true;
  }
  return true;
}

struct ApplicableSet {
  std::string x;
  PruningPolicy policy = PruningPolicy::DiscardDominated;
  std::uint64_t collected = 0;     // before pruning
  std::vector<ProgramPair> pairs;  // kept, by (encoded_len, i, p)
};

namespace detail {

// p compared as a natural number: shorter first, then by value.
inline bool pair_before(const ProgramPair& a, const ProgramPair& b) {
  return std::make_tuple(a.encoded_len, a.i.value, a.p.size(), a.p) < std::make_tuple(b.encoded_len, b.i.value, b.p.size(), b.p);
}

inline void require_pair_sweep(const MachineRange& universe, std::uint64_t budget, int max_prog_len, long double ceiling, const char* what) {
  if (budget < 1) throw std::invalid_argument(std::string(what) + ": budget must be >= 1");
  if (max_prog_len < 0 || max_prog_len > 63) throw std::invalid_argument(std::string(what) + ": max_prog_len must lie in [0, 63]");
  universe.validate();
  require_ceiling(count_pairs(universe, [max_prog_len](int) { return LengthBand{0, max_prog_len}; }), ceiling, what);
}

}  // namespace detail

/// All (i, p) with i in `universe` and l(p) <= max_prog_len proved to print a
/// target within `budget`, pruned by `policy`. One sweep serves every target.
inline std::vector<ApplicableSet> applicable_sets(std::span<const std::string> xs, const MachineRange& universe, std::uint64_t budget,
                                                  int max_prog_len, PruningPolicy policy = PruningPolicy::DiscardDominated,
                                                  const EstimatorOptions& opt = {}) {
  detail::require_pair_sweep(universe, budget, max_prog_len, opt.max_programs, "applicable_set");
  const TargetSet targets(xs);
  struct Collected {
    std::vector<std::vector<ProgramPair>> per_target;
    std::uint64_t total = 0;
  };
  const std::uint64_t ceiling = opt.max_pairs;
  Collected all = sweep_pairs(
      universe, budget, [max_prog_len](int) { return LengthBand{0, max_prog_len}; },
      Collected{std::vector<std::vector<ProgramPair>>(targets.size()), 0},
      [&targets](Collected& acc, const PairView& v) {
        if (!v.verdict.halted_with_output()) return;
        const int slot = targets.find(v.verdict.output);
        if (slot < 0) return;
        acc.per_target[static_cast<std::size_t>(slot)].push_back(make_program_pair(v.index, v.program, v.verdict.steps));
        ++acc.total;
      },
      [ceiling](Collected& acc, Collected&& part) {
        acc.total += part.total;
        if (acc.total > ceiling) {
          throw ResourceLimitError("applicable_set: more than " + std::to_string(ceiling) + " pairs collected",
                                   static_cast<long double>(acc.total), static_cast<long double>(ceiling));
        }
        for (std::size_t s = 0; s < acc.per_target.size(); ++s) {
          auto& dst = acc.per_target[s];
          dst.insert(dst.end(), std::make_move_iterator(part.per_target[s].begin()), std::make_move_iterator(part.per_target[s].end()));
        }
      },
      opt.sweep);

  std::vector<ApplicableSet> out;
  for (const std::string& x : xs) {
    const auto& found = all.per_target[static_cast<std::size_t>(targets.find(x))];
    PruneContext ctx;
    for (const ProgramPair& q : found) ctx.add(q.cost, q.min_part());
    ApplicableSet set{x, policy, found.size(), {}};
    for (const ProgramPair& q : found) {
      if (keeps(policy, q.cost, q.min_part(), ctx)) set.pairs.push_back(q);
    }
    std::sort(set.pairs.begin(), set.pairs.end(), detail::pair_before);
    out.push_back(std::move(set));
  }
  return out;
}

inline ApplicableSet applicable_set(std::string_view x, const MachineRange& universe, std::uint64_t budget, int max_prog_len,
                                    PruningPolicy policy = PruningPolicy::DiscardDominated, const EstimatorOptions& opt = {}) {
  const std::string target(x);
  return applicable_sets(std::span<const std::string>(&target, 1), universe, budget, max_prog_len, policy, opt).front();
}

struct UpperBound {
  std::string x;
  int bound = 0;
  ProgramPair witness;
  bool fallback = false;        // no pair found: cap with the identity-scanner witness
  std::uint64_t collected = 0;  // pairs before pruning
  std::uint64_t kept = 0;
  std::uint64_t max_steps = 0;  // over kept pairs

  friend bool operator==(const UpperBound&, const UpperBound&) = default;
};

namespace detail {

// Pairs of one target grouped by (l(b(i)), l(p)); all pairs of a bucket share
// cost, smaller part and encoded length, so pruning can be decided per bucket.
struct Bucket {
  std::uint64_t count = 0;
  std::uint64_t i = 0;  // smallest (i, p) in the bucket
  std::uint64_t pval = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t witness_steps = 0;
};

inline void merge_bucket(Bucket& acc, const Bucket& part) {
  if (part.count == 0) return;
  if (acc.count == 0 || std::tie(part.i, part.pval) < std::tie(acc.i, acc.pval)) {
    acc.i = part.i;
    acc.pval = part.pval;
    acc.witness_steps = part.witness_steps;
  }
  acc.count += part.count;
  acc.max_steps = std::max(acc.max_steps, part.max_steps);
}

}  // namespace detail

/// min encoded_len over the pruned applicable set of each target, without
/// materialising the sets. Ties: smallest i, then smallest p as a natural number.
inline std::vector<UpperBound> upper_bounds_C(std::span<const std::string> xs, const MachineRange& universe, std::uint64_t budget,
                                              int max_prog_len, PruningPolicy policy = PruningPolicy::DiscardDominated,
                                              const EstimatorOptions& opt = {}) {
  detail::require_pair_sweep(universe, budget, max_prog_len, opt.max_programs, "upper_bound_C");
  const TargetSet targets(xs);
  const std::size_t bands = static_cast<std::size_t>(max_prog_len) + 1;
  const std::size_t per_target = 65 * bands;
  auto at = [per_target, bands](std::size_t slot, int k, int len) {
    return slot * per_target + static_cast<std::size_t>(k) * bands + static_cast<std::size_t>(len);
  };

  std::vector<detail::Bucket> grid = sweep_pairs(
      universe, budget, [max_prog_len](int) { return LengthBand{0, max_prog_len}; },
      std::vector<detail::Bucket>(targets.size() * per_target),
      [&targets, &at](std::vector<detail::Bucket>& acc, const PairView& v) {
        if (!v.verdict.halted_with_output()) return;
        const int slot = targets.find(v.verdict.output);
        if (slot < 0) return;
        detail::Bucket& b = acc[at(static_cast<std::size_t>(slot), v.index_bits, static_cast<int>(v.program.size()))];
        // pairs arrive in (i, p) order, so the first one of a bucket is its smallest
        if (b.count++ == 0) {
          b.i = v.index;
          b.pval = v.program_value;
          b.witness_steps = v.verdict.steps;
        }
        b.max_steps = std::max(b.max_steps, v.verdict.steps);
      },
      [](std::vector<detail::Bucket>& acc, std::vector<detail::Bucket>&& part) {
        for (std::size_t j = 0; j < acc.size(); ++j) detail::merge_bucket(acc[j], part[j]);
      },
      opt.sweep);

  std::vector<UpperBound> out;
  for (const std::string& x : xs) {
    const auto slot = static_cast<std::size_t>(targets.find(x));
    PruneContext ctx;
    UpperBound ub;
    ub.x = x;
    for (int k = 1; k <= 64; ++k) {
      for (int len = 0; len <= max_prog_len; ++len) {
        const detail::Bucket& b = grid[at(slot, k, len)];
        if (b.count == 0) continue;
        ub.collected += b.count;
        ctx.add(k + len, std::min(k, len));
      }
    }
    if (ub.collected == 0) {
      ub.bound = default_cap(x);
      ub.witness = make_program_pair(identity_index().value, x, x.size() + 1);
      ub.fallback = true;
      out.push_back(std::move(ub));
      continue;
    }
    std::optional<std::tuple<int, std::uint64_t, int, std::uint64_t>> best;  // (encoded_len, i, l(p), p)
    std::uint64_t best_steps = 0;
    for (int k = 1; k <= 64; ++k) {
      for (int len = 0; len <= max_prog_len; ++len) {
        const detail::Bucket& b = grid[at(slot, k, len)];
        if (b.count == 0 || !keeps(policy, k + len, std::min(k, len), ctx)) continue;
        ub.kept += b.count;
        ub.max_steps = std::max(ub.max_steps, b.max_steps);
        const auto key = std::make_tuple(2 * k + 1 + len, b.i, len, b.pval);
        if (!best || key < *best) {
          best = key;
          best_steps = b.witness_steps;
        }
      }
    }
    if (!best) throw InternalError("upper_bound_C: pruning removed every pair for '" + x + "'");
    const auto [enc, i, len, pval] = *best;
    ub.bound = enc;
    ub.witness = make_program_pair(i, to_bits(pval, len), best_steps);
    out.push_back(std::move(ub));
  }
  return out;
}

inline UpperBound upper_bound_C(std::string_view x, const MachineRange& universe, std::uint64_t budget, int max_prog_len,
                                PruningPolicy policy = PruningPolicy::DiscardDominated, const EstimatorOptions& opt = {}) {
  const std::string target(x);
  return upper_bounds_C(std::span<const std::string>(&target, 1), universe, budget, max_prog_len, policy, opt).front();
}

}  // namespace kcw

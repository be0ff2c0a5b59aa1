#pragma once

// Output-frequency distributions of small machines, the 1/i-weighted
// "universal distribution" whose total mass exceeds 1, and the corrected
// mixture m^(x) = sum_i alpha(i) * #{p : l(p) = L, T_i(p) = x} / 2^L, whose
// total mass is at most sum_i alpha(i) <= 1. All masses are exact rationals.

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kcw/enumeration.hpp"
#include "kcw/sweep.hpp"
#include "kcw/universal.hpp"

namespace kcw {

/// Shorter strings first, then lexicographic; the order of str_to_nat.
struct ShortlexLess {
  bool operator()(const std::string& a, const std::string& b) const noexcept {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  }
};

enum class Scheme { Frequency, Flawed, Corrected };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Frequency: return "frequency";
    case Scheme::Flawed: return "flawed";
    case Scheme::Corrected: return "corrected";
  }
  return "frequency";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "frequency") return Scheme::Frequency;
  if (s == "flawed") return Scheme::Flawed;
  if (s == "corrected") return Scheme::Corrected;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

struct DistributionTable {
  std::map<std::string, Rational, ShortlexLess> entries;
  Scheme scheme = Scheme::Frequency;
  std::string universe;       // MachineRange::label()
  std::uint64_t budget = 1;
  std::optional<int> L;       // corrected scheme only

  Rational mass(std::string_view x) const {
    const auto it = entries.find(std::string(x));
    return it == entries.end() ? Rational(0) : it->second;
  }

  Rational total_mass() const {
    Rational sum = 0;
    for (const auto& [x, m] : entries) sum += m;
    return sum;
  }

  friend bool operator==(const DistributionTable&, const DistributionTable&) = default;
};

/// 2^-e as an exact rational.
inline Rational pow2_neg(unsigned long e) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, e);
  Rational q(mpz_class(1), den);
  q.canonicalize();
  return q;
}

/// Default mixture weight 2^-(2 l(b(i)) + 1): the Kraft weight of encode_index(i).
inline Rational default_alpha(std::uint64_t i) {
  if (i == 0) throw std::invalid_argument("default_alpha: index must be >= 1");
  return pow2_neg(static_cast<unsigned long>(encoded_index_length(i)));
}

/// Exact sum of default_alpha(i) for i = 1..max_index.
inline Rational kraft_sum(std::uint64_t max_index) {
  Rational sum = 0;
  for (int k = 1; k <= 64; ++k) {
    const std::uint64_t lo = std::uint64_t{1} << (k - 1);
    if (lo > max_index) break;
    const std::uint64_t hi = k == 64 ? max_index : std::min(max_index, (std::uint64_t{1} << k) - 1);
    sum += Rational(mpz_class(static_cast<unsigned long>(hi - lo + 1))) * pow2_neg(static_cast<unsigned long>(2 * k + 1));
  }
  return sum;
}

namespace detail {

using OutputCounts = std::map<std::string, std::uint64_t, ShortlexLess>;

inline void add_counts(OutputCounts& acc, OutputCounts&& part) {
  for (auto& [x, n] : part) acc[x] += n;
}

inline void require_nonempty(const MachineRange& universe, const char* what) {
  universe.validate();
  if (universe.empty()) throw std::invalid_argument(std::string(what) + ": empty universe");
}

}  // namespace detail

/// Every machine of `universe` on the empty tape; entries[x] = #(halts with x) / #machines.
inline DistributionTable output_frequency(const MachineRange& universe, std::uint64_t budget, const SweepOptions& opt = {}) {
  detail::require_nonempty(universe, "output_frequency");
  auto counts = sweep_pairs(
      universe, budget, [](int) { return LengthBand{0, 0}; }, detail::OutputCounts{},
      [](detail::OutputCounts& acc, const PairView& v) {
        if (v.verdict.halted_with_output()) ++acc[v.verdict.output];
      },
      detail::add_counts, opt);
  DistributionTable t{{}, Scheme::Frequency, universe.label(), budget, std::nullopt};
  const mpz_class n = static_cast<unsigned long>(universe.size());
  for (const auto& [x, c] : counts) {
    Rational q(mpz_class(static_cast<unsigned long>(c)), n);
    q.canonicalize();
    t.entries.emplace(x, q);
  }
  return t;
}

struct FlawedReport {
  DistributionTable table;
  std::uint64_t N = 1;
  std::optional<std::uint64_t> crossing;  // first index at which the total exceeds 1
};

/// The 1/i-weighted sum over machines i <= N that halt on the empty tape with
/// a valid output, per output string and in total.
inline FlawedReport flawed_table(std::uint64_t N, std::uint64_t budget, const SweepOptions& opt = {}) {
  if (N < 1) throw std::invalid_argument("flawed_mass: N must be >= 1");
  const MachineRange universe = MachineRange::indices(1, N);
  using Hits = std::vector<std::pair<std::uint64_t, std::string>>;
  Hits hits = sweep_pairs(
      universe, budget, [](int) { return LengthBand{0, 0}; }, Hits{},
      [](Hits& acc, const PairView& v) {
        if (v.verdict.halted_with_output()) acc.emplace_back(v.index, v.verdict.output);
      },
      [](Hits& acc, Hits&& part) { acc.insert(acc.end(), part.begin(), part.end()); }, opt);

  FlawedReport r{DistributionTable{{}, Scheme::Flawed, universe.label(), budget, std::nullopt}, N, std::nullopt};
  Rational running = 0;
  for (const auto& [i, x] : hits) {
    Rational w(mpz_class(1), mpz_class(static_cast<unsigned long>(i)));
    r.table.entries[x] += w;
    running += w;
    if (!r.crossing && running > 1) r.crossing = i;
  }
  return r;
}

/// Flawed mass of one output, or of all outputs when x is nullopt.
inline Rational flawed_mass(const std::optional<std::string>& x, std::uint64_t N, std::uint64_t budget, const SweepOptions& opt = {}) {
  const FlawedReport r = flawed_table(N, budget, opt);
  return x ? r.table.mass(*x) : r.table.total_mass();
}

/// Mixture weights; nullopt selects default_alpha through exact dyadic bookkeeping.
using AlphaFn = std::function<Rational(std::uint64_t)>;

/// Corrected mixture over programs of length exactly L.
inline DistributionTable corrected_table(const MachineRange& universe, int L, std::uint64_t budget, const SweepOptions& opt = {},
                                         const std::optional<AlphaFn>& alpha = std::nullopt) {
  detail::require_nonempty(universe, "corrected_mass");
  if (L < 0 || L > 40) throw std::invalid_argument("corrected_mass: L must lie in [0, 40]");
  DistributionTable t{{}, Scheme::Corrected, universe.label(), budget, L};
  const auto band = [L](int) { return LengthBand{L, L}; };

  if (!alpha) {
    // counts[x][k]: halting pairs with output x whose index has k bits
    using Counts = std::map<std::string, std::array<std::uint64_t, 65>, ShortlexLess>;
    Counts counts = sweep_pairs(
        universe, budget, band, Counts{},
        [](Counts& acc, const PairView& v) {
          if (!v.verdict.halted_with_output()) return;
          auto [it, fresh] = acc.try_emplace(v.verdict.output);
          if (fresh) it->second.fill(0);
          ++it->second[static_cast<std::size_t>(v.index_bits)];
        },
        [](Counts& acc, Counts&& part) {
          for (auto& [x, row] : part) {
            auto [it, fresh] = acc.try_emplace(x);
            if (fresh) it->second.fill(0);
            for (std::size_t k = 0; k < row.size(); ++k) it->second[k] += row[k];
          }
        },
        opt);
    for (const auto& [x, row] : counts) {
      Rational m = 0;
      for (int k = 1; k <= 64; ++k) {
        if (row[static_cast<std::size_t>(k)] == 0) continue;
        m += Rational(mpz_class(static_cast<unsigned long>(row[static_cast<std::size_t>(k)]))) *
             pow2_neg(static_cast<unsigned long>(2 * k + 1 + L));
      }
      t.entries.emplace(x, m);
    }
    return t;
  }

  Rational alpha_total = 0;
  for (std::uint64_t i = universe.first(); i <= universe.last(); ++i) {
    const Rational a = (*alpha)(i);
    if (a < 0) throw std::invalid_argument("corrected_mass: alpha must be nonnegative");
    alpha_total += a;
  }
  if (alpha_total > 1) throw std::invalid_argument("corrected_mass: alpha sums to more than 1 over the universe");
  // per (x, i) counts; fine for the small universes this route is meant for
  using Counts = std::map<std::string, std::map<std::uint64_t, std::uint64_t>, ShortlexLess>;
  Counts counts = sweep_pairs(
      universe, budget, band, Counts{},
      [](Counts& acc, const PairView& v) {
        if (v.verdict.halted_with_output()) ++acc[v.verdict.output][v.index];
      },
      [](Counts& acc, Counts&& part) {
        for (auto& [x, row] : part) {
          for (auto& [i, n] : row) acc[x][i] += n;
        }
      },
      opt);
  const Rational block = pow2_neg(static_cast<unsigned long>(L));
  for (const auto& [x, row] : counts) {
    Rational m = 0;
    for (const auto& [i, n] : row) m += (*alpha)(i) * Rational(mpz_class(static_cast<unsigned long>(n))) * block;
    t.entries.emplace(x, m);
  }
  return t;
}

/// Corrected mass of one output, or of all outputs when x is nullopt.
inline Rational corrected_mass(const std::optional<std::string>& x, const MachineRange& universe, int L, std::uint64_t budget,
                               const SweepOptions& opt = {}) {
  const DistributionTable t = corrected_table(universe, L, budget, opt);
  return x ? t.mass(*x) : t.total_mass();
}

/// Corrected total mass for every L in [0, max_L] and every budget of
/// `budgets` (increasing), from one sweep at the largest budget: a pair that
/// halts in s steps counts at every budget >= s. Indexed [L][budget].
inline std::vector<std::vector<Rational>> corrected_total_grid(const MachineRange& universe, int max_L, std::span<const std::uint64_t> budgets,
                                                               const SweepOptions& opt = {}) {
  detail::require_nonempty(universe, "corrected_total_grid");
  if (max_L < 0 || max_L > 40) throw std::invalid_argument("corrected_total_grid: max_L must lie in [0, 40]");
  if (budgets.empty() || budgets.front() < 1) throw std::invalid_argument("corrected_total_grid: budgets must be >= 1");
  for (std::size_t j = 1; j < budgets.size(); ++j) {
    if (budgets[j] <= budgets[j - 1]) throw std::invalid_argument("corrected_total_grid: budgets must be strictly increasing");
  }
  const std::size_t nb = budgets.size();
  const std::size_t nl = static_cast<std::size_t>(max_L) + 1;
  // counts[(L * 65 + k) * nb + j]: pairs first halting within budgets[j]
  auto at = [nb](std::size_t L, int k, std::size_t j) { return (L * 65 + static_cast<std::size_t>(k)) * nb + j; };
  std::vector<std::uint64_t> counts = sweep_pairs(
      universe, budgets.back(), [max_L](int) { return LengthBand{0, max_L}; }, std::vector<std::uint64_t>(nl * 65 * nb, 0),
      [&](std::vector<std::uint64_t>& acc, const PairView& v) {
        if (!v.verdict.halted_with_output()) return;
        const auto j = static_cast<std::size_t>(std::lower_bound(budgets.begin(), budgets.end(), v.verdict.steps) - budgets.begin());
        ++acc[at(v.program.size(), v.index_bits, j)];
      },
      [](std::vector<std::uint64_t>& acc, std::vector<std::uint64_t>&& part) {
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += part[j];
      },
      opt);
  std::vector<std::vector<Rational>> grid(nl, std::vector<Rational>(nb, Rational(0)));
  for (std::size_t L = 0; L < nl; ++L) {
    for (int k = 1; k <= 64; ++k) {
      std::uint64_t running = 0;
      const Rational w = pow2_neg(static_cast<unsigned long>(2 * k + 1) + L);
      for (std::size_t j = 0; j < nb; ++j) {
        running += counts[at(L, k, j)];
        if (running > 0) grid[L][j] += Rational(mpz_class(static_cast<unsigned long>(running))) * w;
      }
    }
  }
  return grid;
}

/// -log2 of a positive rational, accurate to double precision for any magnitude.
inline double neg_log2(const Rational& q) {
  if (q <= 0) throw std::domain_error("neg_log2: mass must be positive");
  auto log2_z = [](const mpz_class& z) {
    long e = 0;
    const double d = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log2(d) + static_cast<double>(e);
  };
  return log2_z(q.get_den()) - log2_z(q.get_num());
}

/// -log2 m^(x): an estimate of prefix complexity up to an additive constant that
/// this scale cannot control. Throws std::domain_error when x was never produced.
inline double neg_log_estimate(std::string_view x, const MachineRange& universe, int L, std::uint64_t budget, const SweepOptions& opt = {}) {
  const Rational m = corrected_mass(std::string(x), universe, L, budget, opt);
  if (m == 0) {
    throw std::domain_error("neg_log_estimate: '" + std::string(x) + "' has zero mass at this universe, L and budget");
  }
  return neg_log2(m);
}

}  // namespace kcw

#pragma once

// Exhaustive sweeps over (machine, program) pairs. Work is split into chunks of
// consecutive machine indices and reduced in chunk order, so results never
// depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kcw/bits.hpp"
#include "kcw/cache.hpp"
#include "kcw/enumeration.hpp"
#include "kcw/halting.hpp"
#include "kcw/parallel.hpp"

namespace kcw {

struct SweepOptions {
  unsigned threads = 1;
  VerdictCache* cache = nullptr;  // read during the sweep, appended to afterwards
  std::uint64_t machines_per_chunk = 1024;
};

/// One analysed pair as seen by a sweep visitor.
struct PairView {
  std::uint64_t index;
  int index_bits;               // l(b(i))
  const std::string& program;
  std::uint64_t program_value;  // the program's bits as a number
  const VerdictSummary& verdict;
};

/// Program lengths [lo, hi] swept for machines whose index has `k` bits; hi < lo means none.
struct LengthBand {
  int lo = 0;
  int hi = -1;
};

/// Maps output strings to target slots. Duplicate targets share a slot.
class TargetSet {
 public:
  explicit TargetSet(std::span<const std::string> xs) {
    std::size_t max_len = 0;
    for (const auto& x : xs) {
      require_binary(x, "TargetSet");
      max_len = std::max(max_len, x.size());
    }
    max_len_ = max_len;
    dense_ = max_len <= kDenseBits;
    if (dense_) table_.assign((std::size_t{1} << (max_len + 1)) - 1, -1);
    for (const auto& x : xs) {
      if (find(x) >= 0) continue;
      const int slot = static_cast<int>(unique_.size());
      unique_.push_back(x);
      if (dense_) table_[dense_id(x)] = slot;
      else sparse_.emplace(x, slot);
    }
  }

  /// Slot of `out`, or -1 when it is not a target.
  int find(std::string_view out) const {
    if (dense_) {
      if (out.size() > max_len_) return -1;
      return table_[dense_id(out)];
    }
    const auto it = sparse_.find(std::string(out));
    return it == sparse_.end() ? -1 : it->second;
  }

  std::size_t size() const noexcept { return unique_.size(); }
  const std::string& operator[](std::size_t slot) const { return unique_[slot]; }

 private:
  static constexpr std::size_t kDenseBits = 20;

  // Position of s in shortlex order, i.e. str_to_nat(s).
  static std::size_t dense_id(std::string_view s) noexcept {
    return (std::size_t{1} << s.size()) - 1 + static_cast<std::size_t>(from_bits(s));
  }

  bool dense_ = true;
  std::size_t max_len_ = 0;
  std::vector<int> table_;
  std::unordered_map<std::string, int> sparse_;
  std::vector<std::string> unique_;
};

/// Number of pairs a sweep would visit; long double because it may be astronomically large.
template <class Lengths>
long double count_pairs(const MachineRange& universe, Lengths lengths) {
  long double total = 0;
  if (universe.empty()) return 0;
  for (int k = 1; k <= 64; ++k) {
    const std::uint64_t lo_i = k == 1 ? 1 : (std::uint64_t{1} << (k - 1));
    const std::uint64_t hi_i = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    const std::uint64_t a = std::max(lo_i, universe.first());
    const std::uint64_t b = std::min(hi_i, universe.last());
    if (a > b) continue;
    const LengthBand band = lengths(k);
    if (band.hi < band.lo) continue;
    const long double programs = std::ldexp(1.0L, band.hi + 1) - std::ldexp(1.0L, std::max(band.lo, 0));
    total += static_cast<long double>(b - a + 1) * programs;
  }
  return total;
}

/// Calls visit(partial, PairView) for every i in `universe` (ascending) and
/// every program whose length lies in lengths(l(b(i))), shortest first and in
/// numeric order within a length. Each chunk folds into a copy of `prototype`;
/// chunks are merged in index order with merge(acc, std::move(part)).
template <class Partial, class Lengths, class Visit, class Merge>
Partial sweep_pairs(const MachineRange& universe, std::uint64_t budget, Lengths lengths, const Partial& prototype, Visit visit,
                    Merge merge, const SweepOptions& opt = {}) {
  if (budget < 1) throw std::invalid_argument("sweep: budget must be >= 1");
  struct Part {
    Partial user;
    std::vector<CacheRecord> fresh;
  };
  if (universe.empty()) return prototype;
  const std::uint64_t first = universe.first();
  const std::uint64_t count = universe.last() - first + 1;
  const std::uint64_t per_chunk = std::max<std::uint64_t>(1, opt.machines_per_chunk);
  const std::uint64_t n_chunks = (count + per_chunk - 1) / per_chunk;
  const VerdictCache* cache = opt.cache;

  Part total = ordered_reduce(
      n_chunks, opt.threads, Part{prototype, {}},
      [&](std::uint64_t c) {
        Part part{prototype, {}};
        Analyzer an;
        VerdictSummary cached;
        std::string p;
        const std::uint64_t end = first + std::min(count, (c + 1) * per_chunk);
        for (std::uint64_t i = first + c * per_chunk; i < end; ++i) {
          const int k = bit_length(i);
          const LengthBand band = lengths(k);
          if (band.hi < band.lo) continue;
          if (band.hi > 63) throw std::out_of_range("sweep: programs longer than 63 bits");
          const Machine m = index_to_machine(MachineIndex{i});
          for (int len = std::max(band.lo, 0); len <= band.hi; ++len) {
            p.assign(static_cast<std::size_t>(len), '0');
            const std::uint64_t n_prog = std::uint64_t{1} << len;
            for (std::uint64_t v = 0; v < n_prog; ++v) {
              if (v > 0) {
                // binary increment of p
                std::size_t j = p.size();
                while (p[--j] == '1') p[j] = '0';
                p[j] = '1';
              }
              const VerdictSummary* verdict = nullptr;
              if (cache != nullptr && cache->has_index(i)) {
                if (auto hit = cache->lookup(i, p, budget)) {
                  cached = std::move(*hit);
                  verdict = &cached;
                }
              }
              if (verdict == nullptr) {
                verdict = &an.analyze(m, p, budget);
                if (cache != nullptr && verdict->steps >= cache->min_steps()) {
                  part.fresh.push_back(CacheRecord{CacheKey{i, p, budget}, *verdict});
                }
              }
              visit(part.user, PairView{i, k, p, v, *verdict});
            }
          }
        }
        return part;
      },
      [&merge](Part& acc, Part&& part) {
        merge(acc.user, std::move(part.user));
        acc.fresh.insert(acc.fresh.end(), std::make_move_iterator(part.fresh.begin()), std::make_move_iterator(part.fresh.end()));
      });
  if (opt.cache != nullptr && !total.fresh.empty()) opt.cache->append(total.fresh);
  return std::move(total.user);
}

}  // namespace kcw

#pragma once

// Append-only verdict cache. One record per line:
//
//   index <TAB> program <TAB> budget <TAB> status <TAB> steps <TAB> kind <TAB> output <TAB> checksum
//
// `-` stands for an empty program or output, and the checksum is FNV-1a over
// everything before the last tab, in hex. Lines starting with '#' are comments.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kcw/enumeration.hpp"
#include "kcw/errors.hpp"
#include "kcw/halting.hpp"

namespace kcw {

struct CacheKey {
  std::uint64_t index = 1;
  std::string program;
  std::uint64_t budget = 1;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

struct CacheRecord {
  CacheKey key;
  VerdictSummary verdict;

  friend bool operator==(const CacheRecord&, const CacheRecord&) = default;
};

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int j = 15; j >= 0; --j, v >>= 4) out[static_cast<std::size_t>(j)] = kDigits[v & 0xF];
  return out;
}

namespace detail {

inline const char* status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Halted: return "halted";
    case VerdictStatus::HaltedInvalid: return "invalid";
    case VerdictStatus::Diverges: return "diverges";
    case VerdictStatus::Unknown: return "unknown";
  }
  return "unknown";
}

inline const char* kind_name(CertificateKind k) {
  switch (k) {
    case CertificateKind::None: return "none";
    case CertificateKind::ConfigCycle: return "cycle";
    case CertificateKind::BlankEscape: return "escape";
    case CertificateKind::InductiveCycle: return "induction";
  }
  return "none";
}

inline std::optional<VerdictStatus> parse_status(std::string_view s) {
  if (s == "halted") return VerdictStatus::Halted;
  if (s == "invalid") return VerdictStatus::HaltedInvalid;
  if (s == "diverges") return VerdictStatus::Diverges;
  if (s == "unknown") return VerdictStatus::Unknown;
  return std::nullopt;
}

inline std::optional<CertificateKind> parse_kind(std::string_view s) {
  if (s == "none") return CertificateKind::None;
  if (s == "cycle") return CertificateKind::ConfigCycle;
  if (s == "escape") return CertificateKind::BlankEscape;
  if (s == "induction") return CertificateKind::InductiveCycle;
  return std::nullopt;
}

inline std::string dash_if_empty(std::string_view s) { return s.empty() ? std::string("-") : std::string(s); }

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string key_string(std::uint64_t i, std::string_view p, std::uint64_t budget) {
  std::string k = std::to_string(i);
  k += '\t';
  k += p;
  k += '\t';
  k += std::to_string(budget);
  return k;
}

}  // namespace detail

inline std::string format_cache_line(const CacheRecord& r) {
  std::string body = std::to_string(r.key.index) + '\t' + detail::dash_if_empty(r.key.program) + '\t' +
                     std::to_string(r.key.budget) + '\t' + detail::status_name(r.verdict.status) + '\t' +
                     std::to_string(r.verdict.steps) + '\t' + detail::kind_name(r.verdict.kind) + '\t' +
                     detail::dash_if_empty(r.verdict.output);
  return body + '\t' + hex64(fnv1a(body));
}

/// Parses one record line; `line_no` is only used in the error message.
inline CacheRecord parse_cache_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t j = 0; j <= line.size(); ++j) {
    if (j == line.size() || line[j] == '\t') {
      fields.push_back(line.substr(start, j - start));
      start = j + 1;
    }
  }
  if (fields.size() != 8) throw CacheFormatError("expected 8 fields, found " + std::to_string(fields.size()), line_no);
  const std::string_view body = line.substr(0, line.size() - fields[7].size() - 1);
  if (hex64(fnv1a(body)) != fields[7]) throw CacheFormatError("checksum mismatch", line_no);

  auto bits = [&](std::string_view f, const char* what) {
    if (f == "-") return std::string();
    if (f.empty() || !is_binary(f)) throw CacheFormatError(std::string("bad ") + what, line_no);
    return std::string(f);
  };
  auto number = [&](std::string_view f, const char* what) {
    const auto v = detail::parse_u64(f);
    if (!v) throw CacheFormatError(std::string("bad ") + what, line_no);
    return *v;
  };

  CacheRecord r;
  r.key.index = number(fields[0], "index");
  r.key.program = bits(fields[1], "program");
  r.key.budget = number(fields[2], "budget");
  const auto status = detail::parse_status(fields[3]);
  if (!status) throw CacheFormatError("bad status", line_no);
  r.verdict.status = *status;
  r.verdict.steps = number(fields[4], "steps");
  const auto kind = detail::parse_kind(fields[5]);
  if (!kind) throw CacheFormatError("bad certificate kind", line_no);
  r.verdict.kind = *kind;
  r.verdict.output = bits(fields[6], "output");
  if (r.key.index < 1 || r.key.index > max_supported_index()) throw CacheFormatError("index out of range", line_no);
  if (r.key.budget < 1) throw CacheFormatError("budget must be >= 1", line_no);
  const bool diverges = r.verdict.status == VerdictStatus::Diverges;
  if (diverges != (r.verdict.kind != CertificateKind::None)) throw CacheFormatError("certificate kind does not match status", line_no);
  if (r.verdict.status != VerdictStatus::Halted && !r.verdict.output.empty()) throw CacheFormatError("output on a non-halting record", line_no);
  return r;
}

/// Verdicts keyed by (machine index, program, budget), loaded from and appended
/// to a text file. Without a path the cache lives in memory only.
class VerdictCache {
 public:
  static constexpr const char* kHeader = "# kcw verdict cache v1";

  VerdictCache() = default;

  /// Loads `path` if it exists. Only verdicts that took at least `min_steps`
  /// steps are recorded by sweeps.
  explicit VerdictCache(std::filesystem::path path, std::uint64_t min_steps = 64) : path_(std::move(path)), min_steps_(min_steps) {
    if (std::filesystem::exists(*path_)) load();
  }

  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }
  std::uint64_t min_steps() const noexcept { return min_steps_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Records in file order, duplicates removed.
  const std::vector<CacheRecord>& records() const noexcept { return records_; }

  /// Cheap pre-filter for hot loops.
  bool has_index(std::uint64_t i) const { return indices_.contains(i); }

  std::optional<VerdictSummary> lookup(std::uint64_t i, std::string_view p, std::uint64_t budget) const {
    if (!has_index(i)) return std::nullopt;
    const auto it = map_.find(detail::key_string(i, p, budget));
    if (it == map_.end()) return std::nullopt;
    return records_[it->second].verdict;
  }

  /// Adds records in order; keys already present must carry equal payloads.
  void append(std::span<const CacheRecord> batch) {
    std::ofstream out;
    if (path_) {
      const bool fresh = !std::filesystem::exists(*path_) || std::filesystem::file_size(*path_) == 0;
      out.open(*path_, std::ios::app);
      if (!out) throw std::runtime_error("cannot open cache file " + path_->string());
      if (fresh) out << kHeader << '\n';
    }
    for (const CacheRecord& r : batch) {
      if (!insert(r, 0)) continue;
      if (out.is_open()) out << format_cache_line(r) << '\n';
    }
    if (out.is_open()) {
      out.flush();
      if (!out) throw std::runtime_error("write to cache file failed");
    }
  }

  void append(const CacheRecord& r) { append(std::span<const CacheRecord>(&r, 1)); }

 private:
  // False when the key was already present with the same payload.
  bool insert(const CacheRecord& r, std::size_t line_no) {
    std::string key = detail::key_string(r.key.index, r.key.program, r.key.budget);
    const auto it = map_.find(key);
    if (it != map_.end()) {
      if (records_[it->second].verdict != r.verdict) {
        if (line_no > 0) throw CacheFormatError("conflicting duplicate record", line_no);
        throw InternalError("verdict cache: conflicting payload for key " + key);
      }
      return false;
    }
    map_.emplace(std::move(key), records_.size());
    indices_.insert(r.key.index);
    records_.push_back(r);
    return true;
  }

  void load() {
    std::ifstream in(*path_, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cache file " + path_->string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      ++line_no;
      const std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) throw CacheFormatError("truncated record (no newline)", line_no);
      const std::string_view line(text.data() + pos, nl - pos);
      pos = nl + 1;
      if (line.empty() || line.front() == '#') continue;
      insert(parse_cache_line(line, line_no), line_no);
    }
  }

  std::optional<std::filesystem::path> path_;
  std::uint64_t min_steps_ = 64;
  std::vector<CacheRecord> records_;
  std::unordered_map<std::string, std::size_t> map_;
  std::unordered_set<std::uint64_t> indices_;
};

struct CacheStats {
  std::size_t records = 0;
  std::size_t halted = 0;
  std::size_t invalid = 0;
  std::size_t diverges = 0;
  std::size_t unknown = 0;
  std::uint64_t max_steps = 0;
};

inline CacheStats inspect_cache(const VerdictCache& cache) {
  CacheStats s;
  for (const CacheRecord& r : cache.records()) {
    ++s.records;
    switch (r.verdict.status) {
      case VerdictStatus::Halted: ++s.halted; break;
      case VerdictStatus::HaltedInvalid: ++s.invalid; break;
      case VerdictStatus::Diverges: ++s.diverges; break;
      case VerdictStatus::Unknown: ++s.unknown; break;
    }
    s.max_steps = std::max(s.max_steps, r.verdict.steps);
  }
  return s;
}

struct CacheVerifyReport {
  std::size_t checked = 0;
  std::vector<CacheRecord> mismatches;
};

/// Replays a seeded random sample of `sample` records (all of them when the
/// cache is smaller) and reports every record whose fresh verdict differs.
inline CacheVerifyReport verify_cache(const VerdictCache& cache, std::size_t sample, std::uint64_t seed) {
  const auto& all = cache.records();
  std::vector<std::size_t> picks(all.size());
  for (std::size_t j = 0; j < picks.size(); ++j) picks[j] = j;
  if (sample < picks.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(picks.begin(), picks.end(), rng);
    picks.resize(sample);
    std::sort(picks.begin(), picks.end());
  }
  CacheVerifyReport report;
  Analyzer an;
  for (const std::size_t j : picks) {
    const CacheRecord& r = all[j];
    const Machine m = index_to_machine(MachineIndex{r.key.index});
    ++report.checked;
    if (an.analyze(m, r.key.program, r.key.budget) != r.verdict) report.mismatches.push_back(r);
  }
  return report;
}

/// Rewrites the file with one line per key, sorted by key. Returns the record count.
inline std::size_t compact_cache(const std::filesystem::path& path) {
  VerdictCache cache(path);
  std::vector<CacheRecord> sorted = cache.records();
  std::sort(sorted.begin(), sorted.end(), [](const CacheRecord& a, const CacheRecord& b) { return a.key < b.key; });
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << VerdictCache::kHeader << '\n';
    for (const CacheRecord& r : sorted) out << format_cache_line(r) << '\n';
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
  return sorted.size();
}

}  // namespace kcw

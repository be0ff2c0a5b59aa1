#pragma once

// Subcommand implementations behind tools/kcw. Each command writes its export
// to a stream and returns a process exit code, so tests can call them
// in-process.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "kcw/cache.hpp"
#include "kcw/ctm.hpp"
#include "kcw/errors.hpp"
#include "kcw/estimator.hpp"
#include "kcw/halting.hpp"
#include "kcw/io.hpp"

namespace kcw {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitBadInput = 2,
  kExitResourceRefused = 3,
  kExitCacheCorrupt = 4,
  kExitInternal = 5,
};

enum class OutputFormat { Csv, Json };

struct GlobalOptions {
  std::optional<std::uint64_t> budget;  // each command has its own default
  std::optional<int> max_states;
  OutputFormat out = OutputFormat::Csv;
  std::optional<std::filesystem::path> cache_path;
  std::uint64_t cache_min_steps = 64;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> manifest_path;  // sidecar with timestamps
};

struct EnumerateArgs {
  int n_states = 1;
  std::uint64_t limit = 10;
  bool verdict = false;
};

struct EstimateArgs {
  std::string x;
  std::optional<int> cap;
  int max_prog_len = 6;
  long double max_programs = 4194304.0L;
  PruningPolicy policy = PruningPolicy::DiscardDominated;
};

struct CtmArgs {
  Scheme scheme = Scheme::Corrected;
  std::optional<std::uint64_t> N;
  std::optional<std::string> universe;
  std::optional<int> L;
};

struct BbArgs {
  int n_states = 1;
  std::uint64_t start_budget = 16;
  bool verify = true;
};

struct CacheArgs {
  std::string action;  // inspect | verify | compact
  std::size_t sample = 100;
};

/// "eps" (or nothing) names the empty string on the command line.
inline std::string parse_cli_string(std::string_view s) {
  if (s == "eps") return {};
  require_binary(s, "x");
  return std::string(s);
}

/// "states:a-b", "index:a-b" or a bare state count n (= states:1-n).
inline MachineRange parse_universe(std::string_view s) {
  auto pair_of = [&s](std::string_view body) {
    const std::size_t dash = body.find('-');
    if (dash == std::string_view::npos) throw std::invalid_argument("bad universe '" + std::string(s) + "'");
    const auto a = detail::parse_u64(body.substr(0, dash));
    const auto b = detail::parse_u64(body.substr(dash + 1));
    if (!a || !b) throw std::invalid_argument("bad universe '" + std::string(s) + "'");
    return std::make_pair(*a, *b);
  };
  MachineRange r;
  if (s.starts_with("states:")) {
    const auto [a, b] = pair_of(s.substr(7));
    r = MachineRange::states(static_cast<int>(a), static_cast<int>(b));
  } else if (s.starts_with("index:")) {
    const auto [a, b] = pair_of(s.substr(6));
    if (a < 1 || b > max_supported_index()) throw std::invalid_argument("universe index interval out of range");
    r = MachineRange::indices(a, b);
  } else {
    const auto n = detail::parse_u64(s);
    if (!n) throw std::invalid_argument("bad universe '" + std::string(s) + "'");
    r = MachineRange::up_to(static_cast<int>(*n));
  }
  if (r.empty()) throw std::invalid_argument("universe '" + std::string(s) + "' is empty");
  return r;
}

namespace detail {

inline void emit(std::ostream& out, OutputFormat f, const std::string& csv, const Json& json) {
  if (f == OutputFormat::Json) out << json.dump(2) << '\n';
  else out << csv;
}

inline std::optional<VerdictCache> open_cache(const GlobalOptions& g) {
  if (!g.cache_path) return std::nullopt;
  return VerdictCache(*g.cache_path, g.cache_min_steps);
}

inline void finish_manifest(const GlobalOptions& g, const RunManifest& m, std::chrono::system_clock::time_point started) {
  if (g.manifest_path) write_manifest_sidecar(*g.manifest_path, m, started, std::chrono::system_clock::now());
}

inline const char* status_word(VerdictStatus s) { return status_name(s); }

}  // namespace detail

/// Runs `body`, mapping exceptions to exit codes and messages on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ResourceLimitError& e) {
    err << "kcw: resource limit: " << e.what() << '\n';
    return kExitResourceRefused;
  } catch (const CacheFormatError& e) {
    err << "kcw: corrupt cache: " << e.what() << '\n';
    return kExitCacheCorrupt;
  } catch (const InternalError& e) {
    err << "kcw: internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    err << "kcw: bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::out_of_range& e) {
    err << "kcw: bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "kcw: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline int cmd_enumerate(const GlobalOptions& g, const EnumerateArgs& a, std::ostream& out) {
  if (a.n_states < 1 || a.n_states > kMaxStates) throw std::invalid_argument("enumerate: n_states must be in 1.." + std::to_string(kMaxStates));
  const std::uint64_t budget = g.budget.value_or(1024);
  RunManifest m{"enumerate", {}};
  m.set("n_states", std::to_string(a.n_states)).set("limit", std::to_string(a.limit)).set("verdict", a.verdict ? "true" : "false");
  if (a.verdict) m.set("budget", std::to_string(budget));
  const std::uint64_t first = index_offset(a.n_states) + 1;
  const std::uint64_t count = std::min<std::uint64_t>(a.limit, index_offset(a.n_states + 1) - index_offset(a.n_states));

  std::string csv = manifest_comment(m) + (a.verdict ? "index,n_states,table,status,steps,output\n" : "index,n_states,table\n");
  Json rows = Json::array();
  Analyzer an;
  for (std::uint64_t i = first; i < first + count; ++i) {
    const Machine mach = index_to_machine(MachineIndex{i});
    const std::string table = describe(mach);
    csv += std::to_string(i) + "," + std::to_string(a.n_states) + "," + table;
    Json row{{"index", i}, {"n_states", a.n_states}, {"table", table}};
    if (a.verdict) {
      const VerdictSummary& v = an.analyze(mach, "", budget);
      csv += std::string(",") + detail::status_word(v.status) + "," + std::to_string(v.steps) + "," + v.output;
      row["status"] = detail::status_word(v.status);
      row["steps"] = v.steps;
      row["output"] = v.output;
    }
    csv += '\n';
    rows.push_back(row);
  }
  detail::emit(out, g.out, csv, Json{{"manifest", m.to_json()}, {"machines", rows}});
  return kExitOk;
}

inline int cmd_estimate(const GlobalOptions& g, const EstimateArgs& a, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const std::string x = parse_cli_string(a.x);
  const std::uint64_t budget = g.budget.value_or(256);
  const MachineRange universe = MachineRange::up_to(g.max_states.value_or(1));
  auto cache = detail::open_cache(g);

  EstimatorOptions opt;
  opt.universe = universe;
  opt.cap = a.cap;
  opt.max_programs = a.max_programs;
  opt.sweep.threads = g.threads;
  opt.sweep.cache = cache ? &*cache : nullptr;

  RunManifest m{"estimate", {}};
  m.set("x", x).set("budget", std::to_string(budget)).set("universe", universe.label());
  m.set("cap", std::to_string(a.cap.value_or(default_cap(x)))).set("max_prog_len", std::to_string(a.max_prog_len));
  m.set("policy", policy_name(a.policy)).set("seed", std::to_string(g.seed));

  const auto schedule = doubling_schedule(budget);
  const std::vector<PhiResult> profile = phi_profile(x, schedule, opt);
  const ApplicableSet set = applicable_set(x, universe, budget, a.max_prog_len, a.policy, opt);
  const UpperBound ub = upper_bound_C(x, universe, budget, a.max_prog_len, a.policy, opt);

  std::string csv = manifest_comment(m);
  csv += "# table phi\nx,t,value,cap,witness\n";
  Json jphi = Json::array();
  for (const PhiResult& r : profile) {
    csv += r.x + "," + std::to_string(r.t) + "," + std::to_string(r.value) + "," + std::to_string(r.cap) + "," + r.witness.value_or("") + "\n";
    jphi.push_back(Json{{"x", r.x}, {"t", r.t}, {"value", r.value}, {"cap", r.cap}, {"witness", r.witness ? Json(*r.witness) : Json(nullptr)}});
  }
  csv += "# table upper_bound\nx,bound,i,p,cost,encoded_len,steps,fallback,collected,kept,policy\n";
  csv += x + "," + std::to_string(ub.bound) + "," + std::to_string(ub.witness.i.value) + "," + ub.witness.p + "," +
         std::to_string(ub.witness.cost) + "," + std::to_string(ub.witness.encoded_len) + "," + std::to_string(ub.witness.steps) + "," +
         (ub.fallback ? "true" : "false") + "," + std::to_string(ub.collected) + "," + std::to_string(ub.kept) + "," + policy_name(a.policy) + "\n";
  csv += "# table applicable_set\nx,i,p,cost,encoded_len,steps\n";
  Json jset = Json::array();
  for (const ProgramPair& q : set.pairs) {
    csv += x + "," + std::to_string(q.i.value) + "," + q.p + "," + std::to_string(q.cost) + "," + std::to_string(q.encoded_len) + "," +
           std::to_string(q.steps) + "\n";
    jset.push_back(Json{{"x", x}, {"i", q.i.value}, {"p", q.p}, {"cost", q.cost}, {"encoded_len", q.encoded_len}, {"steps", q.steps}});
  }
  Json j{{"manifest", m.to_json()},
         {"phi", jphi},
         {"upper_bound",
          {{"x", x},
           {"bound", ub.bound},
           {"i", ub.witness.i.value},
           {"p", ub.witness.p},
           {"cost", ub.witness.cost},
           {"encoded_len", ub.witness.encoded_len},
           {"steps", ub.witness.steps},
           {"fallback", ub.fallback},
           {"collected", ub.collected},
           {"kept", ub.kept},
           {"policy", policy_name(a.policy)}}},
         {"applicable_set", jset}};
  detail::emit(out, g.out, csv, j);
  detail::finish_manifest(g, m, started);
  return kExitOk;
}

inline int cmd_ctm(const GlobalOptions& g, const CtmArgs& a, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const std::uint64_t budget = g.budget.value_or(1024);
  auto cache = detail::open_cache(g);
  SweepOptions sweep;
  sweep.threads = g.threads;
  sweep.cache = cache ? &*cache : nullptr;

  RunManifest m{"ctm", {}};
  m.set("scheme", scheme_name(a.scheme)).set("budget", std::to_string(budget)).set("seed", std::to_string(g.seed));
  DistributionExport e;
  if (a.scheme == Scheme::Flawed) {
    if (a.L) throw std::invalid_argument("ctm: --L does not apply to the flawed scheme");
    if (a.universe || g.max_states) throw std::invalid_argument("ctm: the flawed scheme takes --N, not a universe");
    const std::uint64_t N = a.N.value_or(10000);
    m.set("N", std::to_string(N));
    FlawedReport r = flawed_table(N, budget, sweep);
    e.table = std::move(r.table);
    e.crossing = r.crossing;
  } else {
    if (a.N) throw std::invalid_argument("ctm: --N only applies to the flawed scheme");
    if (a.scheme == Scheme::Frequency && a.L) throw std::invalid_argument("ctm: --L only applies to the corrected scheme");
    const MachineRange universe = a.universe ? parse_universe(*a.universe) : MachineRange::up_to(g.max_states.value_or(1));
    if (universe.empty()) throw std::invalid_argument("ctm: empty universe");
    m.set("universe", universe.label());
    if (a.scheme == Scheme::Corrected) {
      m.set("L", std::to_string(a.L.value_or(0)));
      e.table = corrected_table(universe, a.L.value_or(0), budget, sweep);
    } else {
      e.table = output_frequency(universe, budget, sweep);
    }
  }
  detail::emit(out, g.out, distribution_csv(e, m), distribution_json(e, m));
  detail::finish_manifest(g, m, started);
  return kExitOk;
}

inline int cmd_bb(const GlobalOptions& g, const BbArgs& a, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  const std::uint64_t max_budget = g.budget.value_or(65536);
  const std::uint64_t start = std::min(a.start_budget, max_budget);
  const MachineRange range = MachineRange::up_to(std::max(a.n_states, 1));
  RunManifest m{"bb", {}};
  m.set("n_states", std::to_string(a.n_states)).set("start_budget", std::to_string(start)).set("max_budget", std::to_string(max_budget));
  m.set("verify", a.verify ? "true" : "false");
  const BBRecord r = bb_search(a.n_states, start, max_budget, range, BBOptions{g.threads, a.verify, std::uint64_t{1} << 14});
  const std::string champion = r.champion ? std::to_string(r.champion->value) : std::string();
  const std::string champion_table = r.champion ? describe(index_to_machine(*r.champion)) : std::string();
  std::string csv = manifest_comment(m);
  csv += "n_states,max_steps,decided_all,undecided_count,budget_used,machines,halting,diverging,cycle_certificates,"
         "escape_certificates,induction_certificates,certificate_failures,champion,champion_table\n";
  csv += std::to_string(r.n_states) + "," + std::to_string(r.max_steps) + "," + (r.decided_all ? "true" : "false") + "," +
         std::to_string(r.undecided_count) + "," + std::to_string(r.budget_used) + "," + std::to_string(r.machines) + "," +
         std::to_string(r.halting) + "," + std::to_string(r.diverging) + "," + std::to_string(r.cycle_certificates) + "," +
         std::to_string(r.escape_certificates) + "," + std::to_string(r.induction_certificates) + "," +
         std::to_string(r.certificate_failures) + "," + champion + "," + champion_table + "\n";
  Json j{{"manifest", m.to_json()},
         {"n_states", r.n_states},
         {"max_steps", r.max_steps},
         {"decided_all", r.decided_all},
         {"undecided_count", r.undecided_count},
         {"budget_used", r.budget_used},
         {"machines", r.machines},
         {"halting", r.halting},
         {"diverging", r.diverging},
         {"cycle_certificates", r.cycle_certificates},
         {"escape_certificates", r.escape_certificates},
         {"induction_certificates", r.induction_certificates},
         {"certificate_failures", r.certificate_failures},
         {"champion", r.champion ? Json(r.champion->value) : Json(nullptr)},
         {"champion_table", champion_table}};
  detail::emit(out, g.out, csv, j);
  detail::finish_manifest(g, m, started);
  return r.certificate_failures == 0 ? kExitOk : kExitInternal;
}

inline int cmd_cache(const GlobalOptions& g, const CacheArgs& a, std::ostream& out) {
  if (!g.cache_path) throw std::invalid_argument("cache: --cache-path is required");
  if (a.action == "compact") {
    const std::size_t n = compact_cache(*g.cache_path);
    detail::emit(out, g.out, "records\n" + std::to_string(n) + "\n", Json{{"records", n}});
    return kExitOk;
  }
  const VerdictCache cache(*g.cache_path, g.cache_min_steps);
  if (a.action == "inspect") {
    const CacheStats s = inspect_cache(cache);
    detail::emit(out, g.out,
                 "records,halted,invalid,diverges,unknown,max_steps\n" + std::to_string(s.records) + "," + std::to_string(s.halted) + "," +
                     std::to_string(s.invalid) + "," + std::to_string(s.diverges) + "," + std::to_string(s.unknown) + "," +
                     std::to_string(s.max_steps) + "\n",
                 Json{{"records", s.records},
                      {"halted", s.halted},
                      {"invalid", s.invalid},
                      {"diverges", s.diverges},
                      {"unknown", s.unknown},
                      {"max_steps", s.max_steps}});
    return kExitOk;
  }
  if (a.action == "verify") {
    const CacheVerifyReport r = verify_cache(cache, a.sample, g.seed);
    std::string csv = "checked,mismatches,seed\n" + std::to_string(r.checked) + "," + std::to_string(r.mismatches.size()) + "," +
                      std::to_string(g.seed) + "\n";
    Json bad = Json::array();
    for (const CacheRecord& rec : r.mismatches) {
      csv += "# mismatch " + format_cache_line(rec) + "\n";
      bad.push_back(format_cache_line(rec));
    }
    detail::emit(out, g.out, csv, Json{{"checked", r.checked}, {"mismatches", bad}, {"seed", g.seed}});
    return r.mismatches.empty() ? kExitOk : kExitInternal;
  }
  throw std::invalid_argument("cache: unknown action '" + a.action + "'");
}

}  // namespace kcw

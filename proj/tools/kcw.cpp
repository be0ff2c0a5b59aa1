#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kcw/commands.hpp"

namespace {

// Writes to --out-file when given, otherwise stdout. Output is buffered so a
// failed command never leaves a partial export behind.
int run_to(const std::string& out_file, const std::function<int(std::ostream&)>& body) {
  std::ostringstream buf;
  const int code = kcw::guarded(std::cerr, [&] { return body(buf); });
  if (code != kcw::kExitOk && code != kcw::kExitInternal) return code;
  if (out_file.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream f(out_file, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::cerr << "kcw: cannot write " << out_file << '\n';
      return kcw::kExitFailure;
    }
    f << buf.str();
  }
  return code;
}

// Each global flag may also come from KCW_<FLAG>. Values are spliced into the
// argument list ahead of the subcommand (unless the flag was given), so they
// pass the same validation as the command line instead of being dropped.
std::vector<std::string> with_env_overrides(int argc, char** argv) {
  static constexpr std::pair<const char*, const char*> kEnv[] = {
      {"--budget", "KCW_BUDGET"},         {"--max-states", "KCW_MAX_STATES"}, {"--out", "KCW_OUT"},
      {"--cache-path", "KCW_CACHE_PATH"}, {"--threads", "KCW_THREADS"},       {"--seed", "KCW_SEED"},
  };
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> injected;
  for (const auto& [flag, env] : kEnv) {
    const char* value = std::getenv(env);
    if (value == nullptr || *value == '\0') continue;
    const std::string f(flag);
    const bool given = std::any_of(args.begin() + 1, args.end(), [&f](const std::string& a) { return a == f || a.starts_with(f + "="); });
    if (!given) injected.push_back(f + "=" + value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kolmogorov complexity workbench: small Turing machines, anytime upper bounds and CTM distributions"};
  app.set_version_flag("--version", kcw::kVersion);
  app.require_subcommand(1);

  kcw::GlobalOptions g;
  std::uint64_t budget = 0;
  int max_states = 0;
  std::string out = "csv";
  std::string cache_path;
  std::string manifest_path;
  std::string out_file;
  unsigned threads = 1;

  auto* o_budget = app.add_option("--budget", budget, "Step budget (command-specific default) [env KCW_BUDGET]")->check(CLI::PositiveNumber);
  auto* o_states = app.add_option("--max-states", max_states, "Largest state count in the universe [env KCW_MAX_STATES]")
                       ->check(CLI::Range(1, kcw::kMaxStates));
  app.add_option("--out", out, "Export format [env KCW_OUT]")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--cache-path", cache_path, "Verdict cache file [env KCW_CACHE_PATH]");
  app.add_option("--cache-min-steps", g.cache_min_steps, "Only cache verdicts that took at least this many steps");
  app.add_option("--threads", threads, "Worker threads, 0 = all cores [env KCW_THREADS]");
  app.add_option("--seed", g.seed, "Seed for sampling [env KCW_SEED]");
  app.add_option("--manifest", manifest_path, "Also write the run manifest with timestamps here");
  app.add_option("-o,--out-file", out_file, "Write the export here instead of stdout");

  kcw::EnumerateArgs ea;
  auto* enumerate = app.add_subcommand("enumerate", "List machines in index order");
  enumerate->fallthrough();
  enumerate->add_option("n_states", ea.n_states, "State count")->required();
  enumerate->add_option("--limit", ea.limit, "How many machines to list");
  enumerate->add_flag("--verdict", ea.verdict, "Add the empty-input verdict");

  kcw::EstimateArgs sa;
  std::string policy = "discard-dominated";
  auto* estimate = app.add_subcommand("estimate", "Anytime upper bounds on C(x)");
  estimate->fallthrough();
  estimate->add_option("x", sa.x, "Target string over {0,1}; 'eps' for the empty string")->required();
  estimate->add_option("--cap", sa.cap, "Program length cap (default l(x)+c)");
  estimate->add_option("--max-prog-len", sa.max_prog_len, "Longest data part p for the applicable set")->check(CLI::Range(0, 63));
  estimate->add_option("--max-programs", sa.max_programs, "Refuse sweeps larger than this");
  estimate->add_option("--policy", policy, "Pruning policy")
      ->check(CLI::IsMember({"discard-dominated", "literal-set-difference", "keep-all"}));

  kcw::CtmArgs ca;
  std::string scheme = "corrected";
  auto* ctm = app.add_subcommand("ctm", "Output distributions of small machines");
  ctm->fallthrough();
  ctm->add_option("--scheme", scheme, "frequency, flawed or corrected")->check(CLI::IsMember({"frequency", "flawed", "corrected"}));
  ctm->add_option("--N", ca.N, "Flawed scheme: number of machines");
  ctm->add_option("--universe", ca.universe, "states:a-b, index:a-b or a state count");
  ctm->add_option("--L", ca.L, "Corrected scheme: longest data part");

  kcw::BbArgs ba;
  bool no_verify = false;
  auto* bb = app.add_subcommand("bb", "Busy-beaver table with certified non-halting");
  bb->fallthrough();
  bb->add_option("n", ba.n_states, "State count")->required()->check(CLI::Range(1, kcw::kMaxStates));
  bb->add_option("--start-budget", ba.start_budget, "First budget of the doubling search")->check(CLI::PositiveNumber);
  bb->add_flag("--no-verify", no_verify, "Skip certificate re-verification");

  kcw::CacheArgs cka;
  auto* cache = app.add_subcommand("cache", "Inspect, verify or compact the verdict cache");
  cache->fallthrough();
  cache->add_option("action", cka.action, "inspect, verify or compact")->required()->check(CLI::IsMember({"inspect", "verify", "compact"}));
  cache->add_option("--sample", cka.sample, "Records replayed by verify");

  try {
    std::vector<std::string> args = with_env_overrides(argc, argv);
    std::reverse(args.begin(), args.end());
    args.pop_back();  // program name
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kcw::kExitBadInput;
  }

  if (o_budget->count() > 0) g.budget = budget;
  if (o_states->count() > 0) g.max_states = max_states;
  g.out = out == "json" ? kcw::OutputFormat::Json : kcw::OutputFormat::Csv;
  if (!cache_path.empty()) g.cache_path = cache_path;
  if (!manifest_path.empty()) g.manifest_path = manifest_path;
  g.threads = kcw::resolve_threads(threads);

  if (*enumerate) return run_to(out_file, [&](std::ostream& os) { return kcw::cmd_enumerate(g, ea, os); });
  if (*estimate) {
    return run_to(out_file, [&](std::ostream& os) {
      sa.policy = kcw::parse_policy(policy);
      return kcw::cmd_estimate(g, sa, os);
    });
  }
  if (*ctm) {
    return run_to(out_file, [&](std::ostream& os) {
      ca.scheme = kcw::parse_scheme(scheme);
      return kcw::cmd_ctm(g, ca, os);
    });
  }
  if (*bb) {
    ba.verify = !no_verify;
    return run_to(out_file, [&](std::ostream& os) { return kcw::cmd_bb(g, ba, os); });
  }
  return run_to(out_file, [&](std::ostream& os) { return kcw::cmd_cache(g, cka, os); });
}

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "kcw/commands.hpp"

using namespace kcw;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("kcw-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

template <class Cmd, class Args>
std::pair<int, std::string> call(Cmd cmd, const GlobalOptions& g, const Args& a) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = guarded(err, [&] { return cmd(g, a, out); });
  return {code, out.str() + err.str()};
}

}  // namespace

TEST(CacheFormat, LineRoundTrip) {
  const CacheRecord r{{1234, "0110", 64}, {VerdictStatus::Halted, 17, CertificateKind::None, "101"}};
  EXPECT_EQ(parse_cache_line(format_cache_line(r), 1).verdict, r.verdict);
  const CacheRecord d{{9, "", 64}, {VerdictStatus::Diverges, 5, CertificateKind::BlankEscape, ""}};
  const CacheRecord back = parse_cache_line(format_cache_line(d), 1);
  EXPECT_EQ(back.key.program, "");
  EXPECT_EQ(back.verdict, d.verdict);
}

TEST(CacheFormat, CorruptionIsLocalised) {
  const CacheRecord r{{12, "01", 64}, {VerdictStatus::Halted, 70, CertificateKind::None, "1"}};
  std::string line = format_cache_line(r);
  line[line.find("\t70\t") + 1] = '8';
  try {
    parse_cache_line(line, 7);
    FAIL() << "checksum not checked";
  } catch (const CacheFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
  EXPECT_THROW(parse_cache_line("1\t-\t64", 1), CacheFormatError);
}

TEST(VerdictCache, PersistsAndRejectsTruncation) {
  TempDir dir;
  const fs::path p = dir / "c.tsv";
  const CacheRecord a{{12, "01", 64}, {VerdictStatus::Halted, 70, CertificateKind::None, "1"}};
  const CacheRecord b{{13, "", 128}, {VerdictStatus::Unknown, 128, CertificateKind::None, ""}};
  {
    VerdictCache c(p);
    c.append(a);
    c.append(b);
    c.append(a);  // idempotent
  }
  VerdictCache c(p);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.lookup(12, "01", 64), a.verdict);
  EXPECT_FALSE(c.lookup(12, "01", 65));
  CacheRecord conflicting = a;
  conflicting.verdict.steps = 71;
  EXPECT_THROW(c.append(conflicting), InternalError);

  std::string text = slurp(p);
  text.pop_back();
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
  try {
    VerdictCache broken(p);
    FAIL() << "truncation not detected";
  } catch (const CacheFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(VerdictCache, SweepsAreCacheTransparentAndVerifiable) {
  TempDir dir;
  GlobalOptions g;
  g.cache_path = dir / "cache.tsv";
  g.cache_min_steps = 4;
  g.budget = 256;
  CtmArgs a;
  a.universe = "index:1-3000";
  a.L = 2;
  GlobalOptions cold = g;
  cold.cache_path.reset();
  const auto reference = call(cmd_ctm, cold, a);
  const auto first = call(cmd_ctm, g, a);
  const std::size_t records = VerdictCache(*g.cache_path).size();
  EXPECT_GT(records, 0u);
  const auto warm = call(cmd_ctm, g, a);
  EXPECT_EQ(first, reference);
  EXPECT_EQ(warm, reference);
  EXPECT_EQ(VerdictCache(*g.cache_path).size(), records);

  CacheArgs verify{"verify", 50};
  const auto [code, text] = call(cmd_cache, g, verify);
  EXPECT_EQ(code, kExitOk) << text;
  EXPECT_NE(text.find("\n50,0,"), std::string::npos) << text;

  CacheArgs compact{"compact", 0};
  EXPECT_EQ(call(cmd_cache, g, compact).first, kExitOk);
  EXPECT_EQ(VerdictCache(*g.cache_path).size(), records);
  EXPECT_EQ(call(cmd_ctm, g, a), reference);
}

TEST(VerdictCache, TamperedVerdictIsReportedByVerify) {
  TempDir dir;
  GlobalOptions g;
  g.cache_path = dir / "c.tsv";
  {
    VerdictCache c(*g.cache_path);
    c.append(CacheRecord{{1, "", 64}, {VerdictStatus::Halted, 2, CertificateKind::None, ""}});  // really 1 step
  }
  const auto [code, text] = call(cmd_cache, g, CacheArgs{"verify", 10});
  EXPECT_EQ(code, kExitInternal);
  EXPECT_NE(text.find("# mismatch"), std::string::npos);

  std::ofstream(*g.cache_path, std::ios::app) << "garbage\n";
  EXPECT_EQ(call(cmd_cache, g, CacheArgs{"inspect", 0}).first, kExitCacheCorrupt);
}

TEST(DistributionExport, CsvAndJsonRoundTrip) {
  RunManifest m{"ctm", {}};
  m.set("scheme", "flawed").set("N", "300");
  const FlawedReport r = flawed_table(300, 256);
  const DistributionExport e{r.table, r.crossing, std::nullopt};
  for (const bool json : {false, true}) {
    const DistributionExport back = json ? parse_distribution_json(distribution_json(e, m).dump()) : parse_distribution_csv(distribution_csv(e, m));
    EXPECT_EQ(back.table.entries, e.table.entries);
    EXPECT_EQ(back.table.scheme, Scheme::Flawed);
    EXPECT_EQ(back.table.universe, "index:1-300");
    EXPECT_EQ(back.table.budget, 256u);
    EXPECT_EQ(back.table.L, std::nullopt);
    EXPECT_EQ(back.crossing, e.crossing);
    EXPECT_EQ(back.digest, m.digest());
  }
  const DistributionTable c = corrected_table(MachineRange::up_to(1), 3, 64);
  const DistributionExport ce{c, std::nullopt, std::nullopt};
  const DistributionExport back = parse_distribution_csv(distribution_csv(ce, m));
  EXPECT_EQ(back.table.entries, c.entries);
  EXPECT_EQ(back.table.L, std::optional<int>(3));
  EXPECT_THROW(parse_distribution_csv("x,y\n"), std::invalid_argument);
}

TEST(Manifest, DigestDependsOnlyOnConfiguration) {
  RunManifest a{"ctm", {}};
  a.set("budget", "16").set("L", "2");
  RunManifest b = a;
  EXPECT_EQ(a.digest(), b.digest());
  b.set("L", "3");
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_EQ(a.to_json()["config"]["budget"], "16");
}

TEST(Enumerate, ListingRoundTripsThroughTheCodec) {
  GlobalOptions g;
  EnumerateArgs a{2, 50, true};
  const auto [code, text] = call(cmd_enumerate, g, a);
  ASSERT_EQ(code, kExitOk);
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 52u);
  EXPECT_EQ(lines[1], "index,n_states,table,status,steps,output");
  for (std::size_t j = 2; j < lines.size(); ++j) {
    const auto f = detail::split(lines[j], ',');
    const std::uint64_t idx = 1000 + (j - 1);
    EXPECT_EQ(std::string(f[0]), std::to_string(idx));
    EXPECT_EQ(machine_to_index(parse_machine(f[2])).value, idx);
  }
  EXPECT_EQ(lines[2].substr(0, lines[2].find(",halted")), "1001,2,1{_:W_>H 0:W_>H 1:W_>H} 2{_:W_>H 0:W_>H 1:W_>H}");
}

TEST(Enumerate, LimitZeroPrintsHeaderOnly) {
  const auto [code, text] = call(cmd_enumerate, GlobalOptions{}, EnumerateArgs{1, 0, false});
  EXPECT_EQ(code, kExitOk);
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1], "index,n_states,table");
  EXPECT_EQ(call(cmd_enumerate, GlobalOptions{}, EnumerateArgs{5, 1, false}).first, kExitBadInput);
}

TEST(Estimate, ProfileAndExitCodes) {
  GlobalOptions g;
  g.budget = 64;
  EstimateArgs a;
  a.x = "11";
  const auto [code, text] = call(cmd_estimate, g, a);
  ASSERT_EQ(code, kExitOk) << text;
  const auto lines = lines_of(text);
  int prev = 1 << 30;
  bool in_phi = false;
  int rows = 0;
  for (const std::string& line : lines) {
    if (line.starts_with("#")) {
      in_phi = line == "# table phi";
      continue;
    }
    if (!in_phi || line.starts_with("x,")) continue;
    const int value = std::stoi(std::string(detail::split(line, ',')[2]));
    EXPECT_LE(value, prev);
    prev = value;
    ++rows;
  }
  EXPECT_EQ(rows, 7);

  EstimateArgs eps;
  eps.x = "eps";
  EXPECT_EQ(call(cmd_estimate, g, eps).first, kExitOk);
  EstimateArgs bad;
  bad.x = "12";
  EXPECT_EQ(call(cmd_estimate, g, bad).first, kExitBadInput);
  EstimateArgs huge;
  huge.x = "1";
  huge.cap = 60;
  EXPECT_EQ(call(cmd_estimate, g, huge).first, kExitResourceRefused);
}

TEST(Ctm, FlagChecksAndLines) {
  GlobalOptions g;
  g.budget = 256;
  CtmArgs flawed;
  flawed.scheme = Scheme::Flawed;
  flawed.N = 200;
  const auto [code, text] = call(cmd_ctm, g, flawed);
  ASSERT_EQ(code, kExitOk);
  EXPECT_NE(text.find("# crossing_N "), std::string::npos);
  CtmArgs with_l = flawed;
  with_l.L = 2;
  EXPECT_EQ(call(cmd_ctm, g, with_l).first, kExitBadInput);
  CtmArgs empty;
  empty.universe = "index:9-3";
  EXPECT_EQ(call(cmd_ctm, g, empty).first, kExitBadInput);
  CtmArgs corrected;
  corrected.universe = "1";
  corrected.L = 1;
  const auto [c2, t2] = call(cmd_ctm, g, corrected);
  ASSERT_EQ(c2, kExitOk);
  const DistributionExport e = parse_distribution_csv(t2);
  EXPECT_LE(e.table.total_mass(), 1);
  EXPECT_NE(t2.find("# total_mass "), std::string::npos);
}

TEST(Bb, OneStateIsDecided) {
  const auto [code, text] = call(cmd_bb, GlobalOptions{}, BbArgs{1, 16, true});
  ASSERT_EQ(code, kExitOk);
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_TRUE(lines[2].starts_with("1,3,true,0,"));
}

TEST(Universe, Parsing) {
  EXPECT_EQ(parse_universe("states:1-2"), MachineRange::up_to(2));
  EXPECT_EQ(parse_universe("2"), MachineRange::up_to(2));
  EXPECT_EQ(parse_universe("index:1-10000"), MachineRange::indices(1, 10000));
  EXPECT_THROW(parse_universe("index:3"), std::invalid_argument);
  EXPECT_THROW(parse_universe("states:0-1"), std::invalid_argument);
  EXPECT_EQ(parse_cli_string("eps"), "");
  EXPECT_THROW(parse_cli_string("ab"), std::invalid_argument);
}

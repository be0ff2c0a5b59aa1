#include <gtest/gtest.h>

#include <random>

#include "kcw/halting.hpp"

using namespace kcw;

namespace {

Machine random_machine(std::mt19937_64& rng, int n) {
  Machine m(n);
  std::uniform_int_distribution<int> act(0, kActionCount - 1);
  std::uniform_int_distribution<int> next(0, n);
  for (int s = 1; s <= n; ++s) {
    for (int r = 0; r < kSymbolCount; ++r) {
      m.set_entry(s, static_cast<Symbol>(r), Transition{static_cast<Action>(act(rng)), static_cast<std::uint8_t>(next(rng))});
    }
  }
  return m;
}

std::string random_bits(std::mt19937_64& rng, int max_len) {
  std::string s(static_cast<std::size_t>(rng() % (max_len + 1)), '0');
  for (char& c : s) c = (rng() & 1) ? '1' : '0';
  return s;
}

}  // namespace

TEST(Analyze, Examples) {
  EXPECT_EQ(analyze(immediate_halt(), "", 10), HaltingVerdict(ProvedHalts{1, std::string()}));

  Machine runner(1);
  runner.with(1, Symbol::Blank, Action::MoveRight, 1);
  const HaltingVerdict v = analyze(runner, "", 100);
  ASSERT_TRUE(std::holds_alternative<ProvedDiverges>(v));
  EXPECT_TRUE(std::holds_alternative<BlankEscape>(std::get<ProvedDiverges>(v).certificate));

  Machine flip(1);
  flip.with(1, Symbol::Blank, Action::WriteOne, 1).with(1, Symbol::One, Action::WriteBlank, 1);
  const HaltingVerdict w = analyze(flip, "", 100);
  ASSERT_TRUE(std::holds_alternative<ProvedDiverges>(w));
  const auto* cyc = std::get_if<ConfigCycle>(&std::get<ProvedDiverges>(w).certificate);
  ASSERT_NE(cyc, nullptr);
  EXPECT_EQ((cyc->second_step - cyc->first_step) % 2, 0u);
  EXPECT_TRUE(verify_certificate(flip, "", std::get<ProvedDiverges>(w)));
}

TEST(Analyze, InductionProvesCounterLikeBouncer) {
  // Sweeps right over its 1s, appends a 1, sweeps back left and repeats: no
  // configuration repeats and the tape keeps growing.
  Machine m(2);
  m.with(1, Symbol::Blank, Action::WriteOne, 2).with(1, Symbol::One, Action::MoveRight, 1);
  m.with(2, Symbol::One, Action::MoveLeft, 2).with(2, Symbol::Blank, Action::MoveRight, 1);
  Analyzer an;
  const VerdictSummary& s = an.analyze(m, "", 4096);
  EXPECT_EQ(s.status, VerdictStatus::Diverges);
  ASSERT_TRUE(an.certificate());
  EXPECT_TRUE(verify_certificate(m, "", *an.certificate()));
}

TEST(Analyze, TamperedCertificatesAreRejected) {
  Machine flip(1);
  flip.with(1, Symbol::Blank, Action::WriteOne, 1).with(1, Symbol::One, Action::WriteBlank, 1);
  EXPECT_FALSE(verify_certificate(flip, "", Certificate{ConfigCycle{0, 1}}));
  EXPECT_FALSE(verify_certificate(immediate_halt(), "", Certificate{ConfigCycle{0, 2}}));
}

// Every proved verdict agrees with plain simulation; divergence certificates
// replay; verdicts only sharpen as the budget grows.
TEST(AnalyzeProperties, SoundnessAndMonotonicity) {
  std::mt19937_64 rng(29);
  Analyzer an;
  int diverging = 0;
  for (int j = 0; j < 6000; ++j) {
    const Machine m = random_machine(rng, 1 + j % 3);
    const std::string x = random_bits(rng, 5);
    const HaltingVerdict small = analyze(m, x, 64);
    const HaltingVerdict big = analyze(m, x, 2048);
    if (!std::holds_alternative<Unknown>(small)) {
      ASSERT_EQ(small, big);
    }
    if (const auto* h = std::get_if<ProvedHalts>(&big)) {
      const RunOutcome o = run(m, x, h->steps);
      if (h->output) {
        ASSERT_EQ(o, RunOutcome(Halted{*h->output, h->steps}));
      } else {
        ASSERT_EQ(o, RunOutcome(InvalidOutput{h->steps}));
      }
    } else if (const auto* d = std::get_if<ProvedDiverges>(&big)) {
      ++diverging;
      ASSERT_TRUE(verify_certificate(m, x, *d));
      ASSERT_TRUE(std::holds_alternative<Cutoff>(run(m, x, 20000)));
    }
    const VerdictSummary& s = an.analyze(m, x, 2048);
    ASSERT_EQ(an.verdict(), big);
    ASSERT_LE(s.steps, 2048u);
  }
  EXPECT_GT(diverging, 0);
}

// Naive oracle: simulate every one-state machine for a long time; anything
// still running is taken as non-halting.
TEST(BusyBeaver, OneStateMatchesNaiveSimulation) {
  std::uint64_t best = 0;
  std::uint64_t halting = 0;
  std::optional<std::uint64_t> champion;
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    const RunOutcome o = run(index_to_machine(MachineIndex{k}), "", 100000);
    std::uint64_t steps = 0;
    if (const auto* h = std::get_if<Halted>(&o)) steps = h->steps;
    else if (const auto* iv = std::get_if<InvalidOutput>(&o)) steps = iv->steps;
    else continue;
    ++halting;
    if (steps > best) {
      best = steps;
      champion = k;
    }
  }
  const BBRecord r = bb_search(1, 4, 1024, MachineRange::up_to(1), BBOptions{1, true});
  EXPECT_TRUE(r.decided_all);
  EXPECT_EQ(r.undecided_count, 0u);
  EXPECT_EQ(r.machines, 1000u);
  EXPECT_EQ(r.halting, halting);
  EXPECT_EQ(r.max_steps, best);
  ASSERT_TRUE(r.champion);
  EXPECT_EQ(r.champion->value, *champion);
  EXPECT_EQ(r.certificate_failures, 0u);
}

TEST(BusyBeaver, RestrictedRange) {
  const BBRecord r = bb_table(1, 16, MachineRange::indices(1, 1));
  EXPECT_EQ(r.machines, 1u);
  EXPECT_GE(r.max_steps, 1u);
  EXPECT_TRUE(r.decided_all);
}

TEST(BusyBeaver, ThreadCountDoesNotChangeTheRecord) {
  const MachineRange slice = MachineRange::indices(1001, 60000);
  const BBRecord a = bb_search(2, 16, 256, slice, BBOptions{1, true});
  const BBRecord b = bb_search(2, 16, 256, slice, BBOptions{4, true, 1000});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.certificate_failures, 0u);
}

TEST(BusyBeaver, SearchEqualsTableAtFinalBudget) {
  const MachineRange slice = MachineRange::indices(1001, 40000);
  const BBRecord s = bb_search(2, 8, 512, slice);
  const BBRecord t = bb_table(2, s.budget_used, slice);
  EXPECT_EQ(s.max_steps, t.max_steps);
  EXPECT_EQ(s.halting, t.halting);
  EXPECT_EQ(s.undecided_count, t.undecided_count);
  EXPECT_EQ(s.champion, t.champion);
}

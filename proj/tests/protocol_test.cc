// Copyright 2026 The kljnsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kljn/protocol.h"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <variant>
#include <vector>

#include "gtest/gtest.h"
#include "kljn/estimators.h"

namespace kljn {
namespace {

TEST(ResistorPairTest, Validation) {
  EXPECT_TRUE(ResistorPair{}.Validate().ok());
  EXPECT_FALSE((ResistorPair{1e5, 1e4}).Validate().ok());
  EXPECT_FALSE((ResistorPair{0, 1e4}).Validate().ok());
  EXPECT_FALSE((ResistorPair{1e4, 1.5e4}).Validate(2.0).ok());
  EXPECT_TRUE((ResistorPair{1e4, 1.5e4}).Validate(1.2).ok());
  EXPECT_EQ(ResistorPair{}.Resistance(Choice::kHigh), 1e5);
}

TEST(ChooseResistorTest, FairIndependentAndReproducible) {
  int alice_low = 0, mixed = 0;
  constexpr int kDraws = 20000;
  for (int e = 0; e < kDraws; ++e) {
    const Choice a = ChooseResistor(7, e, Party::kAlice);
    const Choice b = ChooseResistor(7, e, Party::kBob);
    EXPECT_EQ(a, ChooseResistor(7, e, Party::kAlice));
    alice_low += a == Choice::kLow;
    mixed += a != b;
  }
  const double tol = 4 * std::sqrt(0.25 / kDraws);
  EXPECT_NEAR(alice_low / double{kDraws}, 0.5, tol);
  EXPECT_NEAR(mixed / double{kDraws}, 0.5, tol);
}

TEST(LevelClassifierTest, IdealLoopHasThreeLevels) {
  LevelClassifier c = *LevelClassifier::Create(ResistorPair{}, {1e15, 1e15},
                                               5e3, 0.0);
  const double ll = c.LevelFor(Choice::kLow, Choice::kLow);
  const double lh = c.LevelFor(Choice::kLow, Choice::kHigh);
  const double hl = c.LevelFor(Choice::kHigh, Choice::kLow);
  const double hh = c.LevelFor(Choice::kHigh, Choice::kHigh);
  EXPECT_LT(ll, lh);
  EXPECT_DOUBLE_EQ(lh, hl);
  EXPECT_LT(hl, hh);
  // 4 kTB R_L R_H / (R_L + R_H) at the MIX level.
  EXPECT_NEAR(lh, 2.510270909090909, 1e-12);
  EXPECT_EQ(*c.Classify(ll), Level::kLL);
  EXPECT_EQ(*c.Classify(lh), Level::kMix);
  EXPECT_EQ(*c.Classify(hh), Level::kHH);
  EXPECT_EQ(*c.Classify(std::sqrt(ll * lh) * 1.0001), Level::kMix);
  EXPECT_EQ(*c.Classify(std::sqrt(ll * lh) * 0.9999), Level::kLL);
  EXPECT_FALSE(c.Classify(0.0).ok());
  EXPECT_FALSE(c.Classify(NAN).ok());
}

TEST(LevelClassifierTest, UnequalTemperaturesSplitTheMixLevel) {
  LevelClassifier c = *LevelClassifier::Create(ResistorPair{}, {1e15, 2e15},
                                               5e3, 0.0);
  for (Choice a : {Choice::kLow, Choice::kHigh}) {
    for (Choice b : {Choice::kLow, Choice::kHigh}) {
      const Level want = a == b ? (a == Choice::kLow ? Level::kLL : Level::kHH)
                                : Level::kMix;
      EXPECT_EQ(*c.Classify(c.LevelFor(a, b)), want);
    }
  }
  EXPECT_NE(c.LevelFor(Choice::kLow, Choice::kHigh),
            c.LevelFor(Choice::kHigh, Choice::kLow));
}

TEST(LevelClassifierTest, CurrentStatisticAndErrors) {
  LevelClassifier c = *LevelClassifier::Create(
      ResistorPair{}, {1e15, 1e15}, 5e3, 0.0, End::kAlice,
      Statistic::kCurrentVariance);
  // Current is largest for LL.
  EXPECT_GT(c.LevelFor(Choice::kLow, Choice::kLow),
            c.LevelFor(Choice::kHigh, Choice::kHigh));
  EXPECT_EQ(*c.Classify(c.LevelFor(Choice::kLow, Choice::kLow)), Level::kLL);
  EXPECT_FALSE(LevelClassifier::Create(ResistorPair{}, {0, 0}, 5e3, 0).ok());
  EXPECT_FALSE(LevelClassifier::Create(ResistorPair{1e5, 1e4}, {1, 1}, 5e3, 0).ok());
}

TEST(ClassifyLevelTest, ConvenienceOverloads) {
  EXPECT_EQ(*ClassifyLevel(2.51, ResistorPair{}, 1e15, 5e3, 0.0), Level::kMix);
  EXPECT_EQ(*ClassifyLevel(1.0, ResistorPair{}, {1e15, 1e15}, 5e3, 0.0),
            Level::kLL);
  EXPECT_EQ(*ClassifyLevel(30.0, ResistorPair{}, {1e15, 1e15}, 5e3, 0.0, End::kBob),
            Level::kHH);
}

TEST(DeriveBitTest, TruthTable) {
  EXPECT_EQ(**DeriveBit(Party::kAlice, Choice::kLow, Level::kMix), 1);
  EXPECT_EQ(**DeriveBit(Party::kAlice, Choice::kHigh, Level::kMix), 0);
  EXPECT_EQ(**DeriveBit(Party::kBob, Choice::kHigh, Level::kMix), 1);
  EXPECT_EQ(**DeriveBit(Party::kBob, Choice::kLow, Level::kMix), 0);
  EXPECT_FALSE(DeriveBit(Party::kAlice, Choice::kLow, Level::kLL)->has_value());
  EXPECT_FALSE(DeriveBit(Party::kBob, Choice::kHigh, Level::kHH)->has_value());
  EXPECT_EQ(DeriveBit(Party::kAlice, Choice::kHigh, Level::kLL).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(DeriveBit(Party::kBob, Choice::kLow, Level::kHH).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(DeriveBit(Party::kEve, Choice::kLow, Level::kMix).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(SessionConfigTest, Validation) {
  SessionConfig s;
  EXPECT_TRUE(s.Validate().ok());
  EXPECT_DOUBLE_EQ(s.EffectiveSamples(), 1000.0);
  s.wire_ohm = -1;
  EXPECT_FALSE(s.Validate().ok());
  s = {};
  s.sampling.sample_rate_hz = 15000;
  EXPECT_FALSE(s.Validate().ok());
  s = {};
  s.temperatures.bob_k = -1;
  EXPECT_FALSE(s.Validate().ok());
  s = {};
  s.tap_fraction = 2;
  EXPECT_FALSE(s.Validate().ok());
  s = {};
  s.extra_series_ohm = 50;
  EXPECT_DOUBLE_EQ(s.ActualWireOhm(), 50);

  DefenseConfig d;
  EXPECT_TRUE(d.Validate().ok());
  d.probe_fraction = 1.0;
  EXPECT_FALSE(d.Validate().ok());
  d.enabled = false;
  EXPECT_TRUE(d.Validate().ok());
}

TEST(ScalesForTest, DerivedFromTheLargestPublicLevel) {
  SummaryScales s = *ScalesFor(SessionConfig{}, 12);
  const double hh = 4 * kBoltzmann * 1e15 * 5e4 * 5e3;  // R_H || R_H
  const double ll_i = 4 * kBoltzmann * 1e15 * 5e3 / 2e4;
  EXPECT_NEAR(s.var_u_full, 4 * hh, 1e-9 * hh);
  EXPECT_NEAR(s.sketch_u_full, 6 * std::sqrt(hh), 1e-9);
  EXPECT_NEAR(s.var_i_full, 4 * ll_i, 1e-9 * ll_i);
  EXPECT_EQ(s.bits, 12);
}

TEST(RunKeyExchangeTest, RejectsBadArguments) {
  EXPECT_FALSE(RunKeyExchange(-1, SessionConfig{}, DefenseConfig{}).ok());
  SessionConfig bad;
  bad.pair.high_ohm = 1;
  EXPECT_FALSE(RunKeyExchange(10, bad, DefenseConfig{}).ok());
  DefenseConfig bad_defense;
  bad_defense.risk.threshold = 2;
  EXPECT_FALSE(RunKeyExchange(10, SessionConfig{}, bad_defense).ok());
  RunResult empty = *RunKeyExchange(0, SessionConfig{}, DefenseConfig{});
  EXPECT_TRUE(empty.records.empty());
  EXPECT_TRUE(empty.KeysAgree());
}

TEST(RunKeyExchangeTest, CleanSessionAgreesAndKeepsMixBits) {
  SessionConfig s;
  s.master_seed = 11;
  RunResult r = *RunKeyExchange(400, s, DefenseConfig{});
  ASSERT_EQ(r.records.size(), 400u);
  EXPECT_TRUE(r.KeysAgree());
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.AlarmedExchanges(), 0);
  EXPECT_EQ(r.slots, 400 + r.probes);
  // 3 sigma probe tolerance: 0.27% false alarms per probe.
  EXPECT_LE(r.probe_alarms, 2);
  int64_t mix = 0, kept = 0;
  for (size_t k = 0; k < r.records.size(); ++k) {
    const ExchangeRecord& rec = r.records[k];
    EXPECT_EQ(rec.index, static_cast<int64_t>(k));
    const bool truly_mixed = rec.alice_choice != rec.bob_choice;
    EXPECT_EQ(rec.classification == Level::kMix, truly_mixed);
    EXPECT_EQ(rec.IsBitCandidate(), truly_mixed);
    mix += truly_mixed;
    if (rec.discard_reason == DiscardReason::kKept) {
      ++kept;
      EXPECT_EQ(*rec.bit_value, rec.alice_choice == Choice::kLow ? 1 : 0);
    } else if (!truly_mixed) {
      EXPECT_EQ(rec.discard_reason, DiscardReason::kNotMixed);
    }
  }
  EXPECT_EQ(static_cast<int64_t>(r.alice_key.size()), kept);
  EXPECT_EQ(kept, mix);  // ideal loop: nothing is risky
  EXPECT_NEAR(mix / 400.0, 0.5, 4 * std::sqrt(0.25 / 400));
}

TEST(RunKeyExchangeTest, ResultIsIndependentOfWorkerCount) {
  SessionConfig s;
  s.master_seed = 5;
  s.wire_ohm = 500;
  RunOptions one{.workers = 1, .batch_size = 16};
  RunOptions three{.workers = 3, .batch_size = 7};
  RunResult a = *RunKeyExchange(150, s, DefenseConfig{}, one);
  RunResult b = *RunKeyExchange(150, s, DefenseConfig{}, three);
  EXPECT_EQ(a.alice_key, b.alice_key);
  EXPECT_EQ(a.bob_key, b.bob_key);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].measured_var_u, b.records[k].measured_var_u);
    EXPECT_EQ(a.records[k].risk_score, b.records[k].risk_score);
    EXPECT_EQ(a.records[k].discard_reason, b.records[k].discard_reason);
  }
  EXPECT_EQ(a.public_log.size(), b.public_log.size());
  EXPECT_EQ(a.probes, b.probes);
}

TEST(RunKeyExchangeTest, PublicLogCarriesNoChoices) {
  SessionConfig s;
  RunResult r = *RunKeyExchange(20, s, DefenseConfig{});
  int seeds = 0, summaries = 0, secure = 0, risks = 0;
  for (const PublicMessage& m : r.public_log) {
    seeds += std::holds_alternative<SketchSeedAnnouncement>(m);
    summaries += std::holds_alternative<SummaryAnnouncement>(m);
    secure += std::holds_alternative<SecureAnnouncement>(m);
    risks += std::holds_alternative<RiskAnnouncement>(m);
  }
  EXPECT_EQ(seeds, 20);
  EXPECT_EQ(summaries, 40);
  EXPECT_EQ(secure, 40);
  EXPECT_EQ(risks, 40);
}

std::vector<double> Sinusoid(const SamplingSpec& spec, double rms) {
  std::vector<double> x(spec.SampleCount());
  const double f = spec.sample_rate_hz * (spec.BandBins() / 2) / spec.SampleCount();
  for (size_t t = 0; t < x.size(); ++t) {
    x[t] = rms * std::numbers::sqrt2 *
           std::sin(2 * std::numbers::pi * f * t / spec.sample_rate_hz);
  }
  return x;
}

TEST(RunKeyExchangeTest, PersistentInjectionAborts) {
  SessionConfig s;
  DefenseConfig d;
  d.probe_fraction = 0;
  const double rms_i = std::sqrt(ExpectedLevels(1e4, 1e5, 1e15, 1e15, 0, 5e3)->var_i);
  RunOptions o;
  o.injector = [&](int64_t) { return std::optional(Sinusoid(s.sampling, 0.5 * rms_i)); };
  RunResult r = *RunKeyExchange(100, s, d, o);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.records.size(), 5u);
  EXPECT_TRUE(r.alice_key.empty());
  EXPECT_TRUE(std::holds_alternative<AbortNotice>(r.public_log.back()));
  for (const ExchangeRecord& rec : r.records) {
    EXPECT_TRUE(rec.injected);
    EXPECT_EQ(rec.discard_reason, DiscardReason::kAlarm);
  }
}

TEST(RunKeyExchangeTest, DisabledDefenseDoesNotNotice) {
  SessionConfig s;
  DefenseConfig d;
  d.enabled = false;
  const double rms_i = std::sqrt(ExpectedLevels(1e4, 1e5, 1e15, 1e15, 0, 5e3)->var_i);
  RunOptions o;
  o.injector = [&](int64_t) { return std::optional(Sinusoid(s.sampling, 0.1 * rms_i)); };
  RunResult r = *RunKeyExchange(50, s, d, o);
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.probes, 0);
  EXPECT_EQ(r.AlarmedExchanges(), 0);
  for (const PublicMessage& m : r.public_log) {
    EXPECT_FALSE(std::holds_alternative<SummaryAnnouncement>(m));
    EXPECT_FALSE(std::holds_alternative<RiskAnnouncement>(m));
  }
}

TEST(RunKeyExchangeTest, SplicedResistanceTripsTheProbe) {
  SessionConfig s;
  s.extra_series_ohm = 100;
  DefenseConfig d;
  d.probe_fraction = 0.2;
  d.comparison.consecutive_alarms_to_abort = 0;
  RunResult r = *RunKeyExchange(50, s, d);
  EXPECT_GT(r.probes, 0);
  EXPECT_EQ(r.probe_alarms, r.probes);
  EXPECT_FALSE(r.aborted);
}

TEST(RunKeyExchangeTest, TapSeesEveryExchangeAndTracesAreDumped) {
  SessionConfig s;
  std::atomic<int> seen{0};
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "kljn_protocol_traces";
  std::filesystem::remove_all(dir);
  RunOptions o;
  o.workers = 2;
  o.tap = [&](const SlotView& v) {
    EXPECT_NE(v.trace, nullptr);
    EXPECT_NE(v.alice_summary, nullptr);
    ++seen;
  };
  o.trace_dump_dir = dir.string();
  RunResult r = *RunKeyExchange(12, s, DefenseConfig{}, o);
  EXPECT_EQ(seen.load(), 12);
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    files += entry.path().extension() == ".csv";
  }
  EXPECT_EQ(files, 12);
  std::filesystem::remove_all(dir);
}

TEST(NamesTest, Stable) {
  EXPECT_EQ(ChoiceName(Choice::kLow), "L");
  EXPECT_EQ(LevelName(Level::kMix), "MIX");
  EXPECT_EQ(DiscardReasonName(DiscardReason::kNotMixed), "not_mixed");
  EXPECT_EQ(DiscardReasonName(DiscardReason::kKept), "kept");
}

}  // namespace
}  // namespace kljn

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

#include "kljn/experiments.h"

#include <filesystem>
#include <string>

#include "gtest/gtest.h"

namespace kljn::harness {
namespace {

RunConfig Small(int64_t exchanges, uint64_t seed) {
  RunConfig c;
  c.exchanges = exchanges;
  c.session.master_seed = seed;
  return c;
}

TEST(ExchangeExperimentTest, IdealLoopKeepsKeysAndReportsAttacks) {
  ExchangeExperiment e = *RunExchangeExperiment(Small(300, 4));
  EXPECT_TRUE(e.run.KeysAgree());
  EXPECT_EQ(e.run.records.size(), 300u);
  EXPECT_NEAR(e.MixExchanges() / 300.0, 0.5, 4 * std::sqrt(0.25 / 300));
  ASSERT_EQ(e.attacks.size(), 4u);  // injection is off by default
  EXPECT_EQ(e.Attack(eve::AttackKind::kInjection), nullptr);
  const eve::AttackReport* sy = e.Attack(eve::AttackKind::kScheuerYariv);
  ASSERT_NE(sy, nullptr);
  EXPECT_EQ(sy->mix.evaluated + sy->mix.abstained, e.MixExchanges());
  // Ideal loop: no net power flow beyond 4 SE.
  EXPECT_LT(std::abs(e.cross_power), 4 * e.cross_power_se);
}

TEST(ExchangeExperimentTest, WorkersDoNotChangeResults) {
  RunConfig c = Small(200, 8);
  c.session.wire_ohm = 1000;
  ExchangeExperiment a = *RunExchangeExperiment(c, {.workers = 1});
  ExchangeExperiment b = *RunExchangeExperiment(c, {.workers = 4});
  EXPECT_EQ(a.run.alice_key, b.run.alice_key);
  EXPECT_EQ(a.cross_power, b.cross_power);
  ASSERT_EQ(a.attacks.size(), b.attacks.size());
  for (size_t k = 0; k < a.attacks.size(); ++k) {
    EXPECT_EQ(a.attacks[k].mix.correct, b.attacks[k].mix.correct);
  }
}

TEST(ExchangeExperimentTest, SmallInjectionIsAlarmedAndCleanRunIsNot) {
  RunConfig c = Small(200, 9);
  c.attacks.enabled[static_cast<int>(eve::AttackKind::kInjection)] = true;
  c.attacks.injection = {.gamma = 0.1, .fraction = 1.0};
  c.defense.comparison.consecutive_alarms_to_abort = 0;
  ExchangeExperiment hit = *RunExchangeExperiment(c);
  EXPECT_GE(hit.run.AlarmedExchanges(), 198);
  EXPECT_TRUE(hit.run.alice_key.empty());

  c.attacks.injection.gamma = 0.0;
  ExchangeExperiment clean = *RunExchangeExperiment(c);
  EXPECT_EQ(clean.run.AlarmedExchanges(), 0);
}

TEST(ExchangeExperimentTest, InvalidConfigIsRejected) {
  RunConfig c = Small(10, 1);
  c.ci_level = 2;
  EXPECT_FALSE(RunExchangeExperiment(c).ok());
}

TEST(CalibrationTest, DefaultSessionPasses) {
  CalibrationReport r = *RunCalibration(RunConfig{});
  EXPECT_TRUE(r.Passed()) << r.FirstFailure();
  for (const char* name :
       {"johnson_variance", "psd_flatness", "psd_leakage", "loop_moments_LL",
        "loop_moments_LH", "loop_moments_HL", "loop_moments_HH",
        "effective_dof", "generator_gaussianity", "clean_false_alarm_rate"}) {
    EXPECT_NE(r.Find(name), nullptr) << name;
  }
  EXPECT_TRUE(r.Find("generator_gaussianity")->informational);
  EXPECT_EQ(r.Find("no_such_check"), nullptr);
}

TEST(CalibrationTest, IndividualChecks) {
  SessionConfig s;
  s.distribution = Distribution::kLaplace;
  CalibrationCheck j = *CheckJohnsonVariance(s);
  EXPECT_TRUE(j.pass) << j.measured;
  EXPECT_NEAR(j.expected, 2.761298, 1e-6);

  CalibrationCheck dof = *CheckEffectiveDof(SessionConfig{});
  EXPECT_TRUE(dof.pass);
  EXPECT_EQ(dof.expected, 1000);
  // An impossible tolerance fails, and the report says which check.
  CalibrationCheck tight = *CheckEffectiveDof(SessionConfig{}, 50, 1e-9);
  EXPECT_FALSE(tight.pass);
  CalibrationReport r{{tight}};
  EXPECT_FALSE(r.Passed());
  EXPECT_EQ(r.FirstFailure(), "effective_dof");
  CalibrationCheck info{.name = "x", .pass = false, .informational = true};
  EXPECT_TRUE(CalibrationReport{{info}}.Passed());
}

TEST(SweepTest, RowsPerPointAndAttack) {
  RunConfig base = Small(100, 2);
  SweepConfig sweep{SweepAxis::kWireResistance, {0.0, 0.1}};
  std::vector<SweepRow> rows = *RunSweep(base, sweep);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].axis, "wire_R");
  EXPECT_EQ(rows[0].value, "0");
  EXPECT_EQ(rows[4].value, "0.1");
  EXPECT_EQ(rows[1].attack, "scheuer_yariv");
  for (const SweepRow& r : rows) {
    EXPECT_LE(r.ci_lo, r.accuracy);
    EXPECT_GE(r.ci_hi, r.accuracy);
  }
  EXPECT_FALSE(RunSweep(base, SweepConfig{SweepAxis::kTau, {}}).ok());
}

TEST(SweepCsvTest, RoundTrip) {
  std::vector<SweepRow> rows = {
      {"tau", "0.01", "hao", 100, 51, 0.51, 0.41, 0.61, 0.0003},
      {"tau", "0.1", "passive", 0, 0, 0.5, 0, 1, 0}};
  const std::string csv = SweepCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSweepCsvHeader);
  std::vector<SweepRow> back = *ParseSweepCsv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].value, "0.01");
  EXPECT_EQ(back[0].correct, 51);
  EXPECT_EQ(back[0].leak_bits, 0.0003);

  const std::string path =
      (std::filesystem::temp_directory_path() / "kljn_sweep.csv").string();
  ASSERT_TRUE(WriteSweepCsv(rows, path).ok());
  EXPECT_EQ(ReadSweepCsv(path)->size(), 2u);
  std::filesystem::remove(path);
  EXPECT_EQ(ReadSweepCsv(path).status().code(), absl::StatusCode::kNotFound);
  EXPECT_FALSE(ParseSweepCsv("a,b\n").ok());
  EXPECT_FALSE(ParseSweepCsv(std::string(kSweepCsvHeader) + "\nx,y\n").ok());
  EXPECT_FALSE(
      ParseSweepCsv(std::string(kSweepCsvHeader) + "\na,b,c,1,x,0,0,0,0\n").ok());
}

}  // namespace
}  // namespace kljn::harness

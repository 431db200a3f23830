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

#ifndef KLJN_EXPERIMENTS_H_
#define KLJN_EXPERIMENTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/config.h"
#include "kljn/eve.h"
#include "kljn/protocol.h"

namespace kljn::harness {

struct ExperimentOptions {
  // Any value gives the same results; only wall time changes.
  int workers = 1;
  // Non-empty: one trace CSV per exchange in this directory.
  std::string trace_dump_dir;
};

// One key-exchange run with Eve attacking every exchange live.
struct ExchangeExperiment {
  RunConfig config;
  RunResult run;
  std::vector<eve::AttackReport> attacks;
  // <u_A i> pooled over all exchanges, and its standard error.
  double cross_power = 0.0;
  double cross_power_se = 0.0;

  int64_t MixExchanges() const;
  const eve::AttackReport* Attack(eve::AttackKind kind) const;
};

absl::StatusOr<ExchangeExperiment> RunExchangeExperiment(
    const RunConfig& config, const ExperimentOptions& options = {});

struct CalibrationCheck {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // Reported but never fails the calibration.
  bool informational = false;
  std::string detail;
};

struct CalibrationReport {
  std::vector<CalibrationCheck> checks;

  bool Passed() const;
  const CalibrationCheck* Find(std::string_view name) const;
  // Name of the first failing hard check, empty if none.
  std::string FirstFailure() const;
};

// Sample variance of single-resistor noise over at least `min_samples`
// samples against 4 k T R B; relative tolerance.
absl::StatusOr<CalibrationCheck> CheckJohnsonVariance(
    const SessionConfig& session, int64_t min_samples = 1'000'000,
    double tolerance = 0.03);

// In-band flatness and out-of-band leakage of one 2^16-sample realization.
absl::StatusOr<std::vector<CalibrationCheck>> CheckSpectrum(
    const SessionConfig& session, double flatness_tolerance = 0.10,
    double leakage_limit = 0.01);

// Monte Carlo loop moments of the four arrangements against the closed form,
// as the largest |z| per arrangement.
absl::StatusOr<std::vector<CalibrationCheck>> CheckLoopMoments(
    const SessionConfig& session, int exchanges_per_arrangement = 200,
    double z_limit = 4.0);

// Mean effective DOF of end-voltage traces against 2 B tau.
absl::StatusOr<CalibrationCheck> CheckEffectiveDof(const SessionConfig& session,
                                                   int traces = 50,
                                                   double tolerance = 0.15);

absl::StatusOr<CalibrationReport> RunCalibration(const RunConfig& config,
                                                 int workers = 1);

// One row per (grid point, attack).
struct SweepRow {
  std::string axis;
  std::string value;
  std::string attack;
  int64_t evaluated = 0;
  int64_t correct = 0;
  double accuracy = 0.5;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  double leak_bits = 0.0;
};

absl::StatusOr<std::vector<SweepRow>> RunSweep(
    const RunConfig& base, const SweepConfig& sweep,
    const ExperimentOptions& options = {});

inline constexpr char kSweepCsvHeader[] =
    "axis,value,attack,evaluated,correct,accuracy,ci_lo,ci_hi,leak_bits";
std::string SweepCsv(std::span<const SweepRow> rows);
absl::Status WriteSweepCsv(std::span<const SweepRow> rows,
                           const std::string& path);
absl::StatusOr<std::vector<SweepRow>> ParseSweepCsv(std::string_view text);
absl::StatusOr<std::vector<SweepRow>> ReadSweepCsv(const std::string& path);

}  // namespace kljn::harness

#endif  // KLJN_EXPERIMENTS_H_

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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "kljn/defense.h"
#include "kljn/estimators.h"
#include "kljn/loop_sim.h"
#include "kljn/noisegen.h"
#include "kljn/random.h"

namespace kljn::harness {
namespace {

// Sub-stream ids under StreamRole::kCalibration.
enum CalibrationStream : uint32_t {
  kJohnsonStream = 1,
  kSpectrumStream = 2,
  kLoopStream = 3,
  kDofStream = 7,
  kFalseAlarmStream = 8,
};

uint64_t CalibrationSeed(uint64_t master, uint32_t stream, uint64_t index = 0) {
  return DeriveSeed(master, index, Party::kHarness, StreamRole::kCalibration,
                    stream);
}

// Mean and standard error of the mean.
std::pair<double, double> MeanAndError(const std::vector<double>& x) {
  const double mean = stats::Mean(x);
  if (x.size() < 2) return {mean, 0.0};
  absl::StatusOr<double> var = stats::Variance(x);
  return {mean, var.ok() ? std::sqrt(*var / x.size()) : 0.0};
}

double ZScore(double measured, double expected, double se) {
  if (se > 0) return (measured - expected) / se;
  return measured == expected ? 0.0 : INFINITY;
}

}  // namespace

int64_t ExchangeExperiment::MixExchanges() const {
  return std::count_if(run.records.begin(), run.records.end(),
                       [](const ExchangeRecord& r) {
                         return r.classification == Level::kMix;
                       });
}

const eve::AttackReport* ExchangeExperiment::Attack(eve::AttackKind kind) const {
  for (const eve::AttackReport& r : attacks) {
    if (r.kind == kind) return &r;
  }
  return nullptr;
}

absl::StatusOr<ExchangeExperiment> RunExchangeExperiment(
    const RunConfig& config, const ExperimentOptions& options) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const eve::PublicParameters params =
      eve::PublicParameters::FromSession(config.session);
  absl::StatusOr<eve::AttackSuite> suite =
      eve::AttackSuite::Create(params, config.attacks, config.exchanges);
  if (!suite.ok()) return suite.status();

  RunOptions run_options;
  run_options.workers = std::max(1, options.workers);
  run_options.injector = suite->Injector();
  run_options.tap = suite->Tap();
  run_options.trace_dump_dir = options.trace_dump_dir;
  absl::StatusOr<RunResult> run = RunKeyExchange(
      config.exchanges, config.session, config.defense, run_options);
  if (!run.ok()) return run.status();

  ExchangeExperiment out;
  out.config = config;
  out.run = std::move(*run);
  absl::StatusOr<std::vector<eve::AttackReport>> reports =
      suite->Finish(out.run.records, config.ci_level);
  if (!reports.ok()) return reports.status();
  out.attacks = std::move(*reports);
  out.cross_power = suite->PooledCrossPower();
  out.cross_power_se = suite->PooledCrossPowerStandardError();
  return out;
}

bool CalibrationReport::Passed() const { return FirstFailure().empty(); }

const CalibrationCheck* CalibrationReport::Find(std::string_view name) const {
  for (const CalibrationCheck& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string CalibrationReport::FirstFailure() const {
  for (const CalibrationCheck& c : checks) {
    if (!c.pass && !c.informational) return c.name;
  }
  return "";
}

absl::StatusOr<CalibrationCheck> CheckJohnsonVariance(
    const SessionConfig& session, int64_t min_samples, double tolerance) {
  if (absl::Status s = session.sampling.Validate(); !s.ok()) return s;
  const int n = session.sampling.SampleCount();
  const int64_t realizations = (min_samples + n - 1) / n;
  std::vector<double> pooled;
  pooled.reserve(realizations * n);
  for (int64_t r = 0; r < realizations; ++r) {
    NoiseSource source{.resistance_ohm = session.pair.low_ohm,
                       .temperature_k = session.temperatures.alice_k,
                       .distribution = session.distribution,
                       .seed = CalibrationSeed(session.master_seed,
                                               kJohnsonStream, r)};
    absl::StatusOr<std::vector<double>> x =
        Synthesize(source, session.sampling);
    if (!x.ok()) return x.status();
    pooled.insert(pooled.end(), x->begin(), x->end());
  }
  absl::StatusOr<double> var = stats::Variance(pooled);
  if (!var.ok()) return var.status();
  CalibrationCheck c;
  c.name = "johnson_variance";
  c.measured = *var;
  c.expected = JohnsonVariance(session.pair.low_ohm,
                               session.temperatures.alice_k,
                               session.sampling.bandwidth_hz);
  c.tolerance = tolerance;
  if (c.expected == 0.0) {
    c.pass = c.measured == 0.0;
    c.detail = "zero temperature: expects a silent generator";
  } else {
    const double rel = std::abs(c.measured / c.expected - 1.0);
    c.pass = rel <= tolerance;
    c.detail = absl::StrFormat("%d samples, relative error %.4f",
                               pooled.size(), rel);
  }
  return c;
}

absl::StatusOr<std::vector<CalibrationCheck>> CheckSpectrum(
    const SessionConfig& session, double flatness_tolerance,
    double leakage_limit) {
  SamplingSpec spec = session.sampling;
  constexpr int kLength = 1 << 16;
  spec.bit_period_s = kLength / spec.sample_rate_hz;
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  NoiseSource source{.resistance_ohm = session.pair.low_ohm,
                     .temperature_k = session.temperatures.alice_k,
                     .distribution = session.distribution,
                     .seed = CalibrationSeed(session.master_seed,
                                             kSpectrumStream)};
  absl::StatusOr<std::vector<double>> x = Synthesize(source, spec);
  if (!x.ok()) return x.status();

  CalibrationCheck flat{.name = "psd_flatness",
                        .tolerance = flatness_tolerance};
  CalibrationCheck leak{.name = "psd_leakage", .tolerance = leakage_limit};
  const double variance = JohnsonVariance(session.pair.low_ohm,
                                          session.temperatures.alice_k,
                                          spec.bandwidth_hz);
  if (variance == 0.0) {
    flat.pass = leak.pass = true;
    flat.detail = leak.detail = "zero temperature: nothing to measure";
    return std::vector<CalibrationCheck>{flat, leak};
  }
  absl::StatusOr<stats::SpectralEstimate> psd =
      stats::Psd(*x, spec.sample_rate_hz, 32);
  if (!psd.ok()) return psd.status();
  const double b = spec.bandwidth_hz;
  // Flat one-sided level of brick-wall noise.
  const double level = variance / b;
  constexpr int kSubBands = 4;
  double worst = 0.0;
  for (int k = 0; k < kSubBands; ++k) {
    const double lo = b * (0.05 + 0.9 * k / kSubBands);
    const double hi = b * (0.05 + 0.9 * (k + 1) / kSubBands);
    const double mean_density = psd->IntegralBetween(lo, hi) / (hi - lo);
    worst = std::max(worst, std::abs(mean_density / level - 1.0));
  }
  flat.measured = worst;
  flat.expected = 0.0;
  flat.pass = worst <= flatness_tolerance;
  flat.detail = absl::StrFormat(
      "largest sub-band deviation from 4kTRB/B over %d samples", kLength);
  const double total = psd->Integral();
  leak.measured =
      total > 0 ? psd->IntegralBetween(1.1 * b, spec.sample_rate_hz / 2) / total
                : 0.0;
  leak.expected = 0.0;
  leak.pass = leak.measured <= leakage_limit;
  leak.detail = "energy fraction above 1.1 B";
  return std::vector<CalibrationCheck>{flat, leak};
}

absl::StatusOr<std::vector<CalibrationCheck>> CheckLoopMoments(
    const SessionConfig& session, int exchanges_per_arrangement,
    double z_limit) {
  if (absl::Status s = session.Validate(); !s.ok()) return s;
  if (exchanges_per_arrangement < 2) {
    return absl::InvalidArgumentError("need at least two exchanges");
  }
  std::vector<CalibrationCheck> checks;
  for (Choice a : {Choice::kLow, Choice::kHigh}) {
    for (Choice b : {Choice::kLow, Choice::kHigh}) {
      LoopConfig loop{.alice_ohm = session.pair.Resistance(a),
                      .bob_ohm = session.pair.Resistance(b),
                      .alice_k = session.temperatures.alice_k,
                      .bob_k = session.temperatures.bob_k,
                      .wire_ohm = session.ActualWireOhm(),
                      .tap_fraction = session.tap_fraction,
                      .distribution = session.distribution,
                      .injection_a = {},
                      .measurement_noise_v = session.measurement_noise_v,
                      .measurement_noise_a = session.measurement_noise_a};
      absl::StatusOr<LoopMoments> expected = ExpectedLevels(
          loop.alice_ohm, loop.bob_ohm, loop.alice_k, loop.bob_k,
          loop.wire_ohm, session.sampling.bandwidth_hz, loop.tap_fraction);
      if (!expected.ok()) return expected.status();
      const double noise_v2 = session.measurement_noise_v * session.measurement_noise_v;
      const double noise_a2 = session.measurement_noise_a * session.measurement_noise_a;

      const uint64_t stream =
          CalibrationSeed(session.master_seed, kLoopStream,
                          2 * static_cast<int>(a) + static_cast<int>(b));
      std::vector<double> vua, vub, vi, cross;
      for (int e = 0; e < exchanges_per_arrangement; ++e) {
        absl::StatusOr<Trace> t = SimulateExchange(
            loop, session.sampling, SeedsForExchange(stream, e));
        if (!t.ok()) return t.status();
        vua.push_back(*stats::Variance(t->u_alice));
        vub.push_back(*stats::Variance(t->u_bob));
        vi.push_back(*stats::Variance(t->i_alice));
        cross.push_back(*stats::CrossPower(t->u_alice, t->i_alice));
      }
      const std::pair<const std::vector<double>*, double> rows[] = {
          {&vua, expected->var_u_alice + noise_v2},
          {&vub, expected->var_u_bob + noise_v2},
          {&vi, expected->var_i + noise_a2},
          {&cross, expected->cross_power}};
      double worst = 0.0;
      for (const auto& [series, want] : rows) {
        const auto [mean, se] = MeanAndError(*series);
        worst = std::max(worst, std::abs(ZScore(mean, want, se)));
      }
      CalibrationCheck c;
      c.name = absl::StrCat("loop_moments_", std::string(ChoiceName(a)),
                            std::string(ChoiceName(b)));
      c.measured = worst;
      c.expected = 0.0;
      c.tolerance = z_limit;
      c.pass = worst <= z_limit;
      c.detail = absl::StrFormat(
          "largest |z| of Var u_A, Var u_B, Var i, <u_A i> over %d exchanges",
          exchanges_per_arrangement);
      checks.push_back(std::move(c));
    }
  }
  return checks;
}

absl::StatusOr<CalibrationCheck> CheckEffectiveDof(const SessionConfig& session,
                                                   int traces,
                                                   double tolerance) {
  if (absl::Status s = session.Validate(); !s.ok()) return s;
  CalibrationCheck c;
  c.name = "effective_dof";
  c.expected = session.EffectiveSamples();
  c.tolerance = tolerance;
  if (session.temperatures.alice_k == 0.0) {
    c.pass = true;
    c.detail = "zero temperature: nothing to measure";
    return c;
  }
  std::vector<double> dof;
  for (int r = 0; r < traces; ++r) {
    NoiseSource source{.resistance_ohm = session.pair.low_ohm,
                       .temperature_k = session.temperatures.alice_k,
                       .distribution = session.distribution,
                       .seed = CalibrationSeed(session.master_seed, kDofStream, r)};
    absl::StatusOr<std::vector<double>> x = Synthesize(source, session.sampling);
    if (!x.ok()) return x.status();
    absl::StatusOr<double> d = EffectiveDof(*x);
    if (!d.ok()) return d.status();
    dof.push_back(*d);
  }
  c.measured = stats::Mean(dof);
  c.pass = std::abs(c.measured / c.expected - 1.0) <= tolerance;
  c.detail = absl::StrFormat("mean over %d generator traces vs 2 B tau", traces);
  return c;
}

absl::StatusOr<CalibrationReport> RunCalibration(const RunConfig& config,
                                                 int workers) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const SessionConfig& session = config.session;
  CalibrationReport report;

  absl::StatusOr<CalibrationCheck> johnson = CheckJohnsonVariance(session);
  if (!johnson.ok()) return johnson.status();
  report.checks.push_back(*johnson);

  absl::StatusOr<std::vector<CalibrationCheck>> spectrum = CheckSpectrum(session);
  if (!spectrum.ok()) return spectrum.status();
  report.checks.insert(report.checks.end(), spectrum->begin(), spectrum->end());

  absl::StatusOr<std::vector<CalibrationCheck>> loop = CheckLoopMoments(session);
  if (!loop.ok()) return loop.status();
  report.checks.insert(report.checks.end(), loop->begin(), loop->end());

  absl::StatusOr<CalibrationCheck> dof = CheckEffectiveDof(session);
  if (!dof.ok()) return dof.status();
  report.checks.push_back(*dof);

  // Gaussianity of the generator, for the record only: non-Gaussian
  // configs are legal experiments.
  {
    CalibrationCheck g{.name = "generator_gaussianity", .informational = true};
    NoiseSource source{.resistance_ohm = session.pair.low_ohm,
                       .temperature_k = session.temperatures.alice_k,
                       .distribution = session.distribution,
                       .seed = CalibrationSeed(session.master_seed, kDofStream)};
    absl::StatusOr<std::vector<double>> x = Synthesize(source, session.sampling);
    if (!x.ok()) return x.status();
    g.tolerance = 3.0;
    if (session.temperatures.alice_k == 0.0) {
      g.pass = true;
      g.detail = "zero temperature: nothing to measure";
    } else {
      absl::StatusOr<defense::GaussianityResult> r = defense::GaussianityCheck(
          *x, session.EffectiveSamples(), g.tolerance);
      if (!r.ok()) return r.status();
      g.measured = r->z;
      g.pass = r->pass;
      g.detail = absl::StrFormat("excess kurtosis %.4f (z against sqrt(24/n))",
                                 r->kurtosis);
    }
    report.checks.push_back(std::move(g));
  }

  // Clean-run false alarms at the configured tolerances.
  if (config.defense.enabled && session.temperatures.alice_k > 0 &&
      session.temperatures.bob_k > 0) {
    SessionConfig clean = session;
    clean.extra_series_ohm = 0.0;
    clean.master_seed = CalibrationSeed(session.master_seed, kFalseAlarmStream);
    DefenseConfig defense = config.defense;
    defense.comparison.consecutive_alarms_to_abort = 0;
    RunOptions options;
    options.workers = std::max(1, workers);
    constexpr int64_t kExchanges = 500;
    absl::StatusOr<RunResult> run =
        RunKeyExchange(kExchanges, clean, defense, options);
    if (!run.ok()) return run.status();
    CalibrationCheck fa{.name = "clean_false_alarm_rate"};
    fa.measured =
        static_cast<double>(run->AlarmedExchanges()) / run->records.size();
    fa.expected = 0.0;
    fa.tolerance = 0.01;
    fa.pass = fa.measured <= fa.tolerance;
    fa.detail = absl::StrFormat("%d clean exchanges, %d probe alarms",
                                run->records.size(), run->probe_alarms);
    report.checks.push_back(std::move(fa));
  }
  return report;
}

absl::StatusOr<std::vector<SweepRow>> RunSweep(const RunConfig& base,
                                               const SweepConfig& sweep,
                                               const ExperimentOptions& options) {
  if (absl::Status s = sweep.Validate(); !s.ok()) return s;
  std::vector<SweepRow> rows;
  for (const SweepValue& value : sweep.values) {
    absl::StatusOr<RunConfig> point = ApplySweepPoint(base, sweep.axis, value);
    if (!point.ok()) return point.status();
    ExperimentOptions point_options = options;
    point_options.trace_dump_dir.clear();
    absl::StatusOr<ExchangeExperiment> exp =
        RunExchangeExperiment(*point, point_options);
    if (!exp.ok()) return exp.status();
    for (const eve::AttackReport& r : exp->attacks) {
      SweepRow row;
      row.axis = std::string(SweepAxisName(sweep.axis));
      row.value = SweepValueLabel(value);
      row.attack = r.name;
      row.evaluated = r.mix.evaluated;
      row.correct = r.mix.correct;
      row.accuracy = r.mix.accuracy;
      row.ci_lo = r.mix.ci.lo;
      row.ci_hi = r.mix.ci.hi;
      row.leak_bits = r.mix.leak_bits;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string SweepCsv(std::span<const SweepRow> rows) {
  std::string out = absl::StrCat(kSweepCsvHeader, "\n");
  for (const SweepRow& r : rows) {
    absl::StrAppendFormat(&out, "%s,%s,%s,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                          r.axis, r.value, r.attack, r.evaluated, r.correct,
                          r.accuracy, r.ci_lo, r.ci_hi, r.leak_bits);
  }
  return out;
}

absl::Status WriteSweepCsv(std::span<const SweepRow> rows,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << SweepCsv(rows);
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SweepRow>> ParseSweepCsv(std::string_view text) {
  std::vector<std::string> lines =
      absl::StrSplit(absl::string_view(text.data(), text.size()), '\n',
                     absl::SkipEmpty());
  if (lines.empty() || lines[0] != kSweepCsvHeader) {
    return absl::InvalidArgumentError("sweep CSV header mismatch");
  }
  std::vector<SweepRow> rows;
  for (size_t k = 1; k < lines.size(); ++k) {
    std::vector<std::string> f = absl::StrSplit(lines[k], ',');
    if (f.size() != 9) {
      return absl::InvalidArgumentError(
          absl::StrCat("sweep CSV line ", k + 1, ": expected 9 fields"));
    }
    SweepRow r;
    r.axis = f[0];
    r.value = f[1];
    r.attack = f[2];
    const bool ok = absl::SimpleAtoi(f[3], &r.evaluated) &&
                    absl::SimpleAtoi(f[4], &r.correct) &&
                    absl::SimpleAtod(f[5], &r.accuracy) &&
                    absl::SimpleAtod(f[6], &r.ci_lo) &&
                    absl::SimpleAtod(f[7], &r.ci_hi) &&
                    absl::SimpleAtod(f[8], &r.leak_bits);
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("sweep CSV line ", k + 1, ": bad number"));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

absl::StatusOr<std::vector<SweepRow>> ReadSweepCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSweepCsv(buffer.str());
}

}  // namespace kljn::harness

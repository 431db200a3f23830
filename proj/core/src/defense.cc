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

#include "kljn/defense.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "absl/strings/str_cat.h"
#include "kljn/estimators.h"
#include "kljn/random.h"

namespace kljn::defense {
namespace {

bool Positive(double abs_part, double rel_part) {
  return abs_part >= 0 && rel_part >= 0 && abs_part + rel_part > 0;
}

}  // namespace

std::string_view AlarmCodeName(AlarmCode code) {
  switch (code) {
    case AlarmCode::kCurrentMismatch:
      return "current_mismatch";
    case AlarmCode::kVoltageMismatch:
      return "voltage_mismatch";
    case AlarmCode::kSpectrumMismatch:
      return "spectrum_mismatch";
    case AlarmCode::kOutOfBandEnergy:
      return "out_of_band_energy";
    case AlarmCode::kLevelStatisticsDisagree:
      return "level_statistics_disagree";
    case AlarmCode::kClassificationDisagree:
      return "classification_disagree";
    case AlarmCode::kChoiceInconsistent:
      return "choice_inconsistent";
    case AlarmCode::kIntegrityProbe:
      return "integrity_probe";
    case AlarmCode::kEscalationAbort:
      return "escalation_abort";
    case AlarmCode::kMeasurementFailure:
      return "measurement_failure";
  }
  return "unknown";
}

absl::Status ComparisonPolicy::Validate() const {
  if (!Positive(voltage_abs_v, voltage_rel)) {
    return absl::InvalidArgumentError("voltage tolerance must be > 0");
  }
  if (!Positive(current_abs_a, current_rel)) {
    return absl::InvalidArgumentError("current tolerance must be > 0");
  }
  if (!(spectrum_tol > 0) || !(out_of_band_limit > 0)) {
    return absl::InvalidArgumentError("spectral tolerances must be > 0");
  }
  if (quant_bits < 8 || quant_bits > 24) {
    return absl::InvalidArgumentError("quant_bits must lie in [8, 24]");
  }
  if (consecutive_alarms_to_abort < 0) {
    return absl::InvalidArgumentError(
        "consecutive_alarms_to_abort must be >= 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<ComparisonResult> CompareMeasurements(
    const Summary& alice, const Summary& bob, const SummaryScales& scales,
    double registered_wire_ohm, const ComparisonPolicy& policy) {
  if (absl::Status s = policy.Validate(); !s.ok()) return s;
  if (alice.party != Party::kAlice || bob.party != Party::kBob) {
    return absl::InvalidArgumentError("summaries must come from Alice and Bob");
  }
  if (alice.bits != bob.bits || alice.bits != scales.bits ||
      alice.bits != policy.quant_bits) {
    return absl::InvalidArgumentError(absl::StrCat(
        "summary schema mismatch: ", alice.bits, "-bit vs ", bob.bits,
        "-bit, policy expects ", policy.quant_bits));
  }
  const int bits = scales.bits;
  const double voltage_tol =
      policy.voltage_abs_v + policy.voltage_rel * scales.sketch_u_full;
  const double current_tol =
      policy.current_abs_a + policy.current_rel * scales.sketch_i_full;

  ComparisonResult result;
  auto flag = [&](AlarmCode code, std::string field) {
    result.alarms.push_back({code, std::move(field)});
  };

  for (int k = 0; k < kSketchSize; ++k) {
    const double ia = DequantizeSigned(alice.sketch_i[k], scales.sketch_i_full, bits);
    const double ib = DequantizeSigned(bob.sketch_i[k], scales.sketch_i_full, bits);
    if (std::abs(ia - ib) > current_tol) {
      flag(AlarmCode::kCurrentMismatch, absl::StrCat("sketch_i[", k, "]"));
    }
  }
  const double rms_ia =
      std::sqrt(DequantizeUnsigned(alice.var_i, scales.var_i_full, bits));
  const double rms_ib =
      std::sqrt(DequantizeUnsigned(bob.var_i, scales.var_i_full, bits));
  if (std::abs(rms_ia - rms_ib) > current_tol) {
    flag(AlarmCode::kCurrentMismatch, "var_i");
  }

  for (int k = 0; k < kSketchSize; ++k) {
    const double ua = DequantizeSigned(alice.sketch_u[k], scales.sketch_u_full, bits);
    const double ia = DequantizeSigned(alice.sketch_i[k], scales.sketch_i_full, bits);
    const double ub = DequantizeSigned(bob.sketch_u[k], scales.sketch_u_full, bits);
    if (std::abs(ua - registered_wire_ohm * ia - ub) > voltage_tol) {
      flag(AlarmCode::kVoltageMismatch, absl::StrCat("sketch_u[", k, "]"));
    }
  }

  auto compare_spectrum = [&](const auto& a, const auto& b, const char* name) {
    for (int k = 0; k < kSpectralBins; ++k) {
      const double fa = DequantizeUnsigned(a[k], 1.0, bits);
      const double fb = DequantizeUnsigned(b[k], 1.0, bits);
      if (std::abs(fa - fb) > policy.spectrum_tol) {
        flag(AlarmCode::kSpectrumMismatch, absl::StrCat(name, "[", k, "]"));
      }
    }
    const double oob = std::max(DequantizeUnsigned(a[kSpectralBins - 1], 1.0, bits),
                                DequantizeUnsigned(b[kSpectralBins - 1], 1.0, bits));
    if (oob > policy.out_of_band_limit) {
      flag(AlarmCode::kOutOfBandEnergy,
           absl::StrCat(name, "[", kSpectralBins - 1, "]"));
    }
  };
  compare_spectrum(alice.spectrum_u, bob.spectrum_u, "spectrum_u");
  compare_spectrum(alice.spectrum_i, bob.spectrum_i, "spectrum_i");
  return result;
}

absl::Status ProbeSpec::Validate() const {
  if (!(current_amplitude_a > 0) || !std::isfinite(current_amplitude_a)) {
    return absl::InvalidArgumentError("probe current amplitude must be > 0");
  }
  if (!(frequency_hz >= 0) || !(measurement_noise_v >= 0) ||
      !(tolerance_sigmas > 0)) {
    return absl::InvalidArgumentError("invalid probe parameters");
  }
  return absl::OkStatus();
}

namespace {

double ProbeFrequency(const ProbeSpec& probe, const SamplingSpec& spec) {
  if (probe.frequency_hz > 0) return probe.frequency_hz;
  const int bin = std::max(1, spec.BandBins() / 2);
  return spec.sample_rate_hz * bin / spec.SampleCount();
}

std::vector<double> ProbeCurrent(const ProbeSpec& probe,
                                 const SamplingSpec& spec) {
  const int n = spec.SampleCount();
  const double w = 2.0 * std::numbers::pi * ProbeFrequency(probe, spec) /
                   spec.sample_rate_hz;
  std::vector<double> current(n);
  for (int t = 0; t < n; ++t) {
    current[t] = probe.current_amplitude_a * std::sin(w * t);
  }
  return current;
}

}  // namespace

double ProbeStandardError(const ProbeSpec& probe, const SamplingSpec& spec) {
  double energy = 0.0;
  for (double c : ProbeCurrent(probe, spec)) energy += c * c;
  return std::numbers::sqrt2 * probe.measurement_noise_v / std::sqrt(energy);
}

absl::StatusOr<ProbeResult> IntegrityProbe(const ProbeSpec& probe,
                                           const SamplingSpec& spec,
                                           SlotKind slot,
                                           double registered_wire_ohm,
                                           double actual_wire_ohm,
                                           uint64_t noise_seed) {
  if (slot != SlotKind::kIdle) {
    return absl::FailedPreconditionError(
        "integrity probe requested during an active exchange");
  }
  if (absl::Status s = probe.Validate(); !s.ok()) return s;
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  if (!(registered_wire_ohm >= 0) || !(actual_wire_ohm >= 0)) {
    return absl::InvalidArgumentError("wire resistances must be >= 0");
  }

  const std::vector<double> current = ProbeCurrent(probe, spec);
  Engine engine(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  double num = 0.0, energy = 0.0;
  for (double c : current) {
    // Generators are off: the end voltages differ by the wire drop only.
    const double u_a = c * actual_wire_ohm + probe.measurement_noise_v * noise(engine);
    const double u_b = probe.measurement_noise_v * noise(engine);
    num += (u_a - u_b) * c;
    energy += c * c;
  }
  ProbeResult result;
  result.estimate_ohm = num / energy;
  result.standard_error_ohm =
      std::numbers::sqrt2 * probe.measurement_noise_v / std::sqrt(energy);
  const double deviation = std::abs(result.estimate_ohm - registered_wire_ohm);
  if (result.standard_error_ohm > 0) {
    result.deviation_sigmas = deviation / result.standard_error_ohm;
    result.alarm = result.deviation_sigmas > probe.tolerance_sigmas;
  } else {
    result.deviation_sigmas = deviation > 0 ? INFINITY : 0.0;
    result.alarm = deviation > 1e-9 * std::max(1.0, registered_wire_ohm);
  }
  return result;
}

bool IsProbeSlot(uint64_t master_seed, uint64_t slot, double probe_fraction) {
  if (probe_fraction <= 0) return false;
  Engine engine = MakeEngine(master_seed, slot, Party::kHarness,
                             StreamRole::kProbeSchedule);
  return UniformUnit(engine) < probe_fraction;
}

absl::StatusOr<GaussianityResult> GaussianityCheck(
    std::span<const double> series, double n_eff, double z_threshold) {
  if (series.size() < 1000) {
    return absl::InvalidArgumentError(
        "gaussianity check needs at least 1000 samples");
  }
  absl::StatusOr<double> kurt = stats::ExcessKurtosis(series);
  if (!kurt.ok()) return kurt.status();
  GaussianityResult result;
  result.kurtosis = *kurt;
  result.standard_error = stats::KurtosisStandardError(
      n_eff > 0 ? n_eff : static_cast<double>(series.size()));
  result.z = result.kurtosis / result.standard_error;
  result.pass = std::abs(result.z) <= z_threshold;
  return result;
}

absl::Status RiskPolicy::Validate() const {
  if (!(threshold >= 0 && threshold <= 1)) {
    return absl::InvalidArgumentError("risk threshold must lie in [0, 1]");
  }
  if (!(gaussianity_gate_sigmas > 0)) {
    return absl::InvalidArgumentError("gaussianity gate must be > 0");
  }
  return absl::OkStatus();
}

RiskAssessment RiskScore(const RiskContext& context, const RiskPolicy& policy) {
  RiskAssessment out;
  out.drivers[kWireDriver] = std::tanh(std::abs(context.wire_llr) / 2.0);
  out.drivers[kTemperatureDriver] =
      std::tanh(std::abs(context.temperature_llr) / 2.0);
  const double gate = policy.gaussianity_gate_sigmas;
  out.drivers[kGaussianityDriver] =
      std::clamp((std::abs(context.kurtosis_z) - gate) / gate, 0.0, 1.0);
  out.drivers[kAlarmDriver] = context.alarmed ? 1.0 : 0.0;
  double keep = 1.0;
  for (double s : out.drivers) keep *= 1.0 - s;
  out.score = std::clamp(1.0 - keep, 0.0, 1.0);
  out.discard = out.score > policy.threshold;
  return out;
}

absl::StatusOr<MixHypotheses> ComputeMixHypotheses(
    double low_ohm, double high_ohm, double alice_k, double bob_k,
    double wire_ohm, double bandwidth_hz, double tap_fraction) {
  absl::StatusOr<LoopMoments> low = ExpectedLevels(
      low_ohm, high_ohm, alice_k, bob_k, wire_ohm, bandwidth_hz, tap_fraction);
  if (!low.ok()) return low.status();
  absl::StatusOr<LoopMoments> high = ExpectedLevels(
      high_ohm, low_ohm, alice_k, bob_k, wire_ohm, bandwidth_hz, tap_fraction);
  if (!high.ok()) return high.status();
  return MixHypotheses{*low, *high};
}

double GaussianLogLikelihoodRatio(double x, double mu_low, double mu_high,
                                  double se) {
  if (mu_low == mu_high) return 0.0;
  if (!(se > 0)) {
    // Noise-free statistic: the nearer mean wins outright.
    const double margin = std::abs(x - mu_high) - std::abs(x - mu_low);
    return margin > 0 ? INFINITY : (margin < 0 ? -INFINITY : 0.0);
  }
  const double dh = x - mu_high;
  const double dl = x - mu_low;
  return (dh * dh - dl * dl) / (2.0 * se * se);
}

absl::StatusOr<RiskContext> AssessExchange(std::span<const double> u_own,
                                           std::span<const double> i_own,
                                           bool own_is_alice,
                                           const MixHypotheses& hypotheses,
                                           double registered_wire_ohm,
                                           double n_eff) {
  if (u_own.size() != i_own.size()) {
    return absl::InvalidArgumentError("series length mismatch");
  }
  std::vector<double> far(u_own.size());
  const double sign = own_is_alice ? -1.0 : 1.0;
  for (size_t t = 0; t < far.size(); ++t) {
    far[t] = u_own[t] + sign * i_own[t] * registered_wire_ohm;
  }
  std::span<const double> alice_end = own_is_alice ? u_own : std::span<const double>(far);
  std::span<const double> bob_end = own_is_alice ? std::span<const double>(far) : u_own;

  absl::StatusOr<stats::VarianceDifference> diff =
      stats::VarianceDifferenceOf(alice_end, bob_end, n_eff);
  if (!diff.ok()) return diff.status();
  absl::StatusOr<double> var_i = stats::Variance(i_own);
  if (!var_i.ok()) return var_i.status();
  absl::StatusOr<double> kurt = stats::ExcessKurtosis(u_own);

  const LoopMoments& low = hypotheses.alice_low;
  const LoopMoments& high = hypotheses.alice_high;
  RiskContext context;
  context.wire_llr = GaussianLogLikelihoodRatio(
      diff->difference, low.var_u_alice - low.var_u_bob,
      high.var_u_alice - high.var_u_bob, diff->standard_error);
  const double var_i_se =
      stats::VarianceStandardError(0.5 * (low.var_i + high.var_i), n_eff);
  context.temperature_llr =
      GaussianLogLikelihoodRatio(*var_i, low.var_i, high.var_i, var_i_se);
  context.kurtosis_z =
      kurt.ok() ? *kurt / stats::KurtosisStandardError(n_eff) : 0.0;
  return context;
}

}  // namespace kljn::defense

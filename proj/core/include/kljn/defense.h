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

#ifndef KLJN_DEFENSE_H_
#define KLJN_DEFENSE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/loop_sim.h"
#include "kljn/noisegen.h"
#include "kljn/summary.h"

namespace kljn::defense {

enum class AlarmCode : uint8_t {
  kCurrentMismatch,
  kVoltageMismatch,
  kSpectrumMismatch,
  kOutOfBandEnergy,
  kLevelStatisticsDisagree,
  kClassificationDisagree,
  kChoiceInconsistent,
  kIntegrityProbe,
  kEscalationAbort,
  kMeasurementFailure,
};

// Stable machine-readable reason code, e.g. "current_mismatch".
std::string_view AlarmCodeName(AlarmCode code);

struct Alarm {
  AlarmCode code = AlarmCode::kCurrentMismatch;
  std::string field;  // violated summary field, if any

  bool operator==(const Alarm&) const = default;
};

// Tolerances for comparing Alice's and Bob's published summaries. Each
// tolerance is abs + rel * (full scale of the compared field).
struct ComparisonPolicy {
  double voltage_abs_v = 0.0;
  double voltage_rel = 2.0 / 2047.0;
  double current_abs_a = 0.0;
  double current_rel = 2.0 / 2047.0;
  // Absolute tolerance on band energy fractions.
  double spectrum_tol = 0.02;
  // Largest energy fraction allowed above B.
  double out_of_band_limit = 0.01;
  int quant_bits = 12;
  // Consecutive alarmed slots that abort the session; 0 disables aborts.
  int consecutive_alarms_to_abort = 5;

  absl::Status Validate() const;
};

struct ComparisonResult {
  std::vector<Alarm> alarms;
  bool ok() const { return alarms.empty(); }
};

// Checks Bob's summary against Alice's. The voltage sketch is compared after
// removing the registered wire drop, sketch(u_a) - R_w sketch(i_a). Any
// injected current shows up as a current-sketch mismatch because the shared
// loop current cancels exactly.
absl::StatusOr<ComparisonResult> CompareMeasurements(
    const Summary& alice, const Summary& bob, const SummaryScales& scales,
    double registered_wire_ohm, const ComparisonPolicy& policy);

enum class SlotKind : uint8_t { kIdle, kExchange };

// A known sinusoidal current driven through the wire in an idle slot with
// both generators off; the end voltages are read with instrument noise.
struct ProbeSpec {
  double current_amplitude_a = 1.0e-3;
  // Zero selects the in-band bin nearest B / 2.
  double frequency_hz = 0.0;
  double measurement_noise_v = 0.1;
  double tolerance_sigmas = 3.0;

  absl::Status Validate() const;
};

struct ProbeResult {
  double estimate_ohm = 0.0;
  double standard_error_ohm = 0.0;
  double deviation_sigmas = 0.0;
  bool alarm = false;
};

// Least-squares wire resistance from the end-voltage difference:
//   R_hat = <u_a - u_b, i_p> / <i_p, i_p>,  SE = sqrt(2) sigma_m / |i_p|.
// Alarms when |R_hat - registered| > tolerance_sigmas * SE.
absl::StatusOr<ProbeResult> IntegrityProbe(const ProbeSpec& probe,
                                           const SamplingSpec& spec,
                                           SlotKind slot,
                                           double registered_wire_ohm,
                                           double actual_wire_ohm,
                                           uint64_t noise_seed);

// Analytic standard error of the probe estimate.
double ProbeStandardError(const ProbeSpec& probe, const SamplingSpec& spec);

// Seeded slot schedule; reproducible in tests, unpredictable without the
// master seed.
bool IsProbeSlot(uint64_t master_seed, uint64_t slot, double probe_fraction);

struct GaussianityResult {
  double kurtosis = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  bool pass = true;
};

// Excess kurtosis against sqrt(24 / n_eff); fails when |z| > z_threshold.
// n_eff <= 0 means "use the sample count". Needs N >= 1000.
absl::StatusOr<GaussianityResult> GaussianityCheck(
    std::span<const double> series, double n_eff, double z_threshold = 3.0);

struct RiskPolicy {
  double threshold = 0.5;
  // Kurtosis z-scores below this contribute nothing.
  double gaussianity_gate_sigmas = 3.0;

  absl::Status Validate() const;
};

// Leak drivers of one exchange as seen from the public wire data. The two
// log-likelihood ratios are those of "Alice holds R_L" against "Alice holds
// R_H" for the wire-asymmetry and loop-current statistics.
struct RiskContext {
  double wire_llr = 0.0;
  double temperature_llr = 0.0;
  double kurtosis_z = 0.0;
  bool alarmed = false;
};

enum RiskDriver { kWireDriver = 0, kTemperatureDriver, kGaussianityDriver, kAlarmDriver };

struct RiskAssessment {
  double score = 0.0;
  bool discard = false;
  std::array<double, 4> drivers{};
};

// score = 1 - prod_k (1 - s_k) with
//   s_wire = tanh(|wire_llr| / 2), s_temp = tanh(|temperature_llr| / 2)
//     (Eve's posterior advantage |2p - 1| from that statistic),
//   s_gauss = clamp((|kurtosis_z| - gate) / gate, 0, 1),
//   s_alarm = 1 if alarmed.
// Discard iff score > threshold.
RiskAssessment RiskScore(const RiskContext& context, const RiskPolicy& policy);

// Loop moments under the two MIX hypotheses, from public parameters only.
struct MixHypotheses {
  LoopMoments alice_low;   // Alice R_L, Bob R_H
  LoopMoments alice_high;  // Alice R_H, Bob R_L
};

absl::StatusOr<MixHypotheses> ComputeMixHypotheses(
    double low_ohm, double high_ohm, double alice_k, double bob_k,
    double wire_ohm, double bandwidth_hz, double tap_fraction);

// log N(x; mu_low, se) - log N(x; mu_high, se); zero when the means agree.
double GaussianLogLikelihoodRatio(double x, double mu_low, double mu_high,
                                  double se);

// Builds the risk context from one party's own-end series. The far-end
// voltage is reconstructed through the registered wire resistance.
absl::StatusOr<RiskContext> AssessExchange(std::span<const double> u_own,
                                           std::span<const double> i_own,
                                           bool own_is_alice,
                                           const MixHypotheses& hypotheses,
                                           double registered_wire_ohm,
                                           double n_eff);

}  // namespace kljn::defense

#endif  // KLJN_DEFENSE_H_

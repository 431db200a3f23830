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

#ifndef KLJN_LOOP_SIM_H_
#define KLJN_LOOP_SIM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/noisegen.h"

namespace kljn {

// Two noise generators, each in series with its resistor, joined by a lumped
// resistive wire. Eve's midpoint tap splits the wire into
// tap_fraction * wire_ohm (Alice side) and the rest (Bob side). An optional
// injection current is drawn out of the midpoint node.
struct LoopConfig {
  double alice_ohm = 1.0e4;
  double bob_ohm = 1.0e5;
  double alice_k = 0.0;
  double bob_k = 0.0;
  double wire_ohm = 0.0;
  double tap_fraction = 0.5;
  Distribution distribution = Distribution::kGaussian;
  // Empty means no injection; otherwise one value (amps) per sample.
  std::vector<double> injection_a;
  // Optional additive instrument noise on every recorded series.
  double measurement_noise_v = 0.0;
  double measurement_noise_a = 0.0;

  absl::Status Validate() const;
  double TotalResistance() const { return alice_ohm + bob_ohm + wire_ohm; }
};

// Synchronized wire observables for one bit period. Currents flow from
// Alice's end toward Bob's end; i_alice - i_bob is the injected current.
struct Trace {
  std::vector<double> u_alice;
  std::vector<double> u_bob;
  std::vector<double> i_alice;
  std::vector<double> i_bob;
  std::vector<double> u_mid;
  SamplingSpec spec;

  size_t size() const { return u_alice.size(); }
};

struct ExchangeSeeds {
  uint64_t alice_generator = 0;
  uint64_t bob_generator = 0;
  uint64_t measurement = 0;
};

// Seeds for exchange `index` under `master`, one stream per party and role.
ExchangeSeeds SeedsForExchange(uint64_t master, uint64_t index);

// Exact per-sample nodal solution for given generator voltages:
//   i_alice = (g_A - g_B + i_E (R_bob_side + R_b)) / R_tot
//   i_bob   = i_alice - i_E
//   u_alice = g_A - i_alice R_a
//   u_mid   = u_alice - i_alice R_alice_side
//   u_bob   = u_mid - i_bob R_bob_side
absl::StatusOr<Trace> SolveLoop(const LoopConfig& config,
                                const SamplingSpec& spec,
                                std::span<const double> alice_generator,
                                std::span<const double> bob_generator);

// Synthesizes both generators from their Johnson variances and solves the
// loop.
absl::StatusOr<Trace> SimulateExchange(const LoopConfig& config,
                                       const SamplingSpec& spec,
                                       const ExchangeSeeds& seeds);

// Closed-form second moments of the loop without injection.
struct LoopMoments {
  double var_u_alice = 0.0;
  double var_u_bob = 0.0;
  double var_u_mid = 0.0;
  double var_i = 0.0;
  double cross_power = 0.0;      // <u_alice i>, power into the wire at Alice
  double cross_power_bob = 0.0;  // <u_bob i>, power out of the wire at Bob
  double cross_power_mid = 0.0;  // <u_mid i>
};

absl::StatusOr<LoopMoments> ExpectedLevels(double alice_ohm, double bob_ohm,
                                           double alice_k, double bob_k,
                                           double wire_ohm,
                                           double bandwidth_hz,
                                           double tap_fraction = 0.5);

// One CSV per exchange:
//   time_s,u_alice_V,u_bob_V,i_alice_A,i_bob_A,u_mid_V
absl::Status WriteTraceCsv(const Trace& trace, const std::string& path);

}  // namespace kljn

#endif  // KLJN_LOOP_SIM_H_

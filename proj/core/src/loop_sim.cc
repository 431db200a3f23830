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

#include "kljn/loop_sim.h"

#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "kljn/random.h"

namespace kljn {
namespace {

absl::Status CheckFinite(std::span<const double> series, const char* name) {
  for (double x : series) {
    if (!std::isfinite(x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite sample in ", name));
    }
  }
  return absl::OkStatus();
}

void AddNoise(std::vector<double>& series, double sigma, Engine& engine) {
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& x : series) x += normal(engine);
}

}  // namespace

absl::Status LoopConfig::Validate() const {
  for (double v : {alice_ohm, bob_ohm, alice_k, bob_k, wire_ohm, tap_fraction,
                   measurement_noise_v, measurement_noise_a}) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("loop parameters must be finite");
    }
  }
  if (alice_ohm <= 0 || bob_ohm <= 0) {
    return absl::InvalidArgumentError("party resistances must be > 0");
  }
  if (alice_k < 0 || bob_k < 0) {
    return absl::InvalidArgumentError("temperatures must be >= 0");
  }
  if (wire_ohm < 0) {
    return absl::InvalidArgumentError("wire_ohm must be >= 0");
  }
  if (tap_fraction < 0 || tap_fraction > 1) {
    return absl::InvalidArgumentError("tap_fraction must lie in [0, 1]");
  }
  if (measurement_noise_v < 0 || measurement_noise_a < 0) {
    return absl::InvalidArgumentError("measurement noise must be >= 0");
  }
  return absl::OkStatus();
}

ExchangeSeeds SeedsForExchange(uint64_t master, uint64_t index) {
  return {
      .alice_generator =
          DeriveSeed(master, index, Party::kAlice, StreamRole::kGenerator),
      .bob_generator =
          DeriveSeed(master, index, Party::kBob, StreamRole::kGenerator),
      .measurement = DeriveSeed(master, index, Party::kHarness,
                                StreamRole::kMeasurementNoise),
  };
}

absl::StatusOr<Trace> SolveLoop(const LoopConfig& config,
                                const SamplingSpec& spec,
                                std::span<const double> alice_generator,
                                std::span<const double> bob_generator) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const size_t n = alice_generator.size();
  if (bob_generator.size() != n) {
    return absl::InvalidArgumentError("generator series length mismatch");
  }
  const bool injected = !config.injection_a.empty();
  if (injected && config.injection_a.size() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "injection series has ", config.injection_a.size(),
        " samples, trace has ", n));
  }
  if (absl::Status s = CheckFinite(alice_generator, "alice generator");
      !s.ok()) {
    return s;
  }
  if (absl::Status s = CheckFinite(bob_generator, "bob generator"); !s.ok()) {
    return s;
  }
  if (absl::Status s = CheckFinite(config.injection_a, "injection"); !s.ok()) {
    return s;
  }

  const double r_a = config.alice_ohm;
  const double r_b = config.bob_ohm;
  const double r_near = config.tap_fraction * config.wire_ohm;
  const double r_far = config.wire_ohm - r_near;
  const double r_tot = config.TotalResistance();

  Trace trace;
  trace.spec = spec;
  trace.u_alice.resize(n);
  trace.u_bob.resize(n);
  trace.i_alice.resize(n);
  trace.i_bob.resize(n);
  trace.u_mid.resize(n);
  for (size_t t = 0; t < n; ++t) {
    const double drawn = injected ? config.injection_a[t] : 0.0;
    const double i1 =
        (alice_generator[t] - bob_generator[t] + drawn * (r_far + r_b)) / r_tot;
    const double i2 = injected ? i1 - drawn : i1;
    const double u_a = alice_generator[t] - i1 * r_a;
    const double u_m = u_a - i1 * r_near;
    trace.i_alice[t] = i1;
    trace.i_bob[t] = i2;
    trace.u_alice[t] = u_a;
    trace.u_mid[t] = u_m;
    trace.u_bob[t] = u_m - i2 * r_far;
  }
  return trace;
}

absl::StatusOr<Trace> SimulateExchange(const LoopConfig& config,
                                       const SamplingSpec& spec,
                                       const ExchangeSeeds& seeds) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  NoiseSource alice{.resistance_ohm = config.alice_ohm,
                    .temperature_k = config.alice_k,
                    .distribution = config.distribution,
                    .seed = seeds.alice_generator};
  NoiseSource bob{.resistance_ohm = config.bob_ohm,
                  .temperature_k = config.bob_k,
                  .distribution = config.distribution,
                  .seed = seeds.bob_generator};
  absl::StatusOr<std::vector<double>> g_a = Synthesize(alice, spec);
  if (!g_a.ok()) return g_a.status();
  absl::StatusOr<std::vector<double>> g_b = Synthesize(bob, spec);
  if (!g_b.ok()) return g_b.status();
  absl::StatusOr<Trace> trace = SolveLoop(config, spec, *g_a, *g_b);
  if (!trace.ok()) return trace;

  if (config.measurement_noise_v > 0 || config.measurement_noise_a > 0) {
    Engine engine(seeds.measurement);
    AddNoise(trace->u_alice, config.measurement_noise_v, engine);
    AddNoise(trace->u_bob, config.measurement_noise_v, engine);
    AddNoise(trace->u_mid, config.measurement_noise_v, engine);
    AddNoise(trace->i_alice, config.measurement_noise_a, engine);
    AddNoise(trace->i_bob, config.measurement_noise_a, engine);
  }
  return trace;
}

absl::StatusOr<LoopMoments> ExpectedLevels(double alice_ohm, double bob_ohm,
                                           double alice_k, double bob_k,
                                           double wire_ohm,
                                           double bandwidth_hz,
                                           double tap_fraction) {
  if (!(alice_ohm > 0) || !(bob_ohm > 0)) {
    return absl::InvalidArgumentError("resistances must be > 0");
  }
  if (!(wire_ohm >= 0) || !(bandwidth_hz > 0) || alice_k < 0 || bob_k < 0 ||
      !(tap_fraction >= 0 && tap_fraction <= 1)) {
    return absl::InvalidArgumentError("invalid loop parameters");
  }
  const double var_a = JohnsonVariance(alice_ohm, alice_k, bandwidth_hz);
  const double var_b = JohnsonVariance(bob_ohm, bob_k, bandwidth_hz);
  const double r_tot = alice_ohm + bob_ohm + wire_ohm;
  const double r_tot2 = r_tot * r_tot;
  const double near = alice_ohm + tap_fraction * wire_ohm;

  // u = a * g_A + b * g_B with independent generators.
  auto variance = [&](double a, double b) { return a * a * var_a + b * b * var_b; };
  // <u i> with i = (g_A - g_B) / R_tot.
  auto cross = [&](double a, double b) { return (a * var_a - b * var_b) / r_tot; };

  const double a_alice = (bob_ohm + wire_ohm) / r_tot;
  const double b_alice = alice_ohm / r_tot;
  const double a_bob = bob_ohm / r_tot;
  const double b_bob = (alice_ohm + wire_ohm) / r_tot;
  const double a_mid = 1.0 - near / r_tot;
  const double b_mid = near / r_tot;

  LoopMoments m;
  m.var_i = (var_a + var_b) / r_tot2;
  m.var_u_alice = variance(a_alice, b_alice);
  m.var_u_bob = variance(a_bob, b_bob);
  m.var_u_mid = variance(a_mid, b_mid);
  m.cross_power = cross(a_alice, b_alice);
  m.cross_power_bob = cross(a_bob, b_bob);
  m.cross_power_mid = cross(a_mid, b_mid);
  return m;
}

absl::Status WriteTraceCsv(const Trace& trace, const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "w"),
                                             &std::fclose);
  if (!file) {
    return absl::UnavailableError(absl::StrCat("cannot open ", path));
  }
  std::fputs("time_s,u_alice_V,u_bob_V,i_alice_A,i_bob_A,u_mid_V\n",
             file.get());
  const double dt = 1.0 / trace.spec.sample_rate_hz;
  for (size_t t = 0; t < trace.size(); ++t) {
    absl::FPrintF(file.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<double>(t) * dt, trace.u_alice[t],
                  trace.u_bob[t], trace.i_alice[t], trace.i_bob[t],
                  trace.u_mid[t]);
  }
  return absl::OkStatus();
}

}  // namespace kljn

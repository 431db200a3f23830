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

#ifndef KLJN_NOISEGEN_H_
#define KLJN_NOISEGEN_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace kljn {

// Exact SI value, J/K.
inline constexpr double kBoltzmann = 1.380649e-23;

// Band-limited sampling of one bit-exchange period.
struct SamplingSpec {
  double bandwidth_hz = 5000.0;
  double sample_rate_hz = 40960.0;
  double bit_period_s = 0.1;

  // Checks B > 0, tau > 0, fs >= 4 B (aliasing guard), N >= 8 and that the
  // band holds at least one frequency bin.
  absl::Status Validate() const;

  // N = round(fs * tau).
  int SampleCount() const;

  // Number of positive-frequency DFT bins with f <= B at length N. Each bin
  // carries two real degrees of freedom.
  int BandBins() const;
};

enum class Distribution : uint8_t { kGaussian, kUniform, kLaplace };

std::string_view DistributionName(Distribution d);
absl::StatusOr<Distribution> ParseDistribution(std::string_view name);

// Excess kurtosis of the white marginal before band-limiting.
double MarginalExcessKurtosis(Distribution d);

struct NoiseSource {
  double resistance_ohm = 1.0e4;
  // Effective temperature; any non-negative scale is legal.
  double temperature_k = 0.0;
  Distribution distribution = Distribution::kGaussian;
  uint64_t seed = 0;

  absl::Status Validate() const;
};

// 4 k_B T R B.
double JohnsonVariance(double resistance_ohm, double temperature_k,
                       double bandwidth_hz);

// Band-limited noise voltage series of length spec.SampleCount().
//
// The spectrum is a brick wall: bins 1..BandBins() carry independent
// coefficients, the DC and every bin above B are zero. Gaussian sources draw
// the coefficients directly; uniform and Laplace sources draw a white series
// with the requested marginal and band-limit it through the same mask. The
// output is scaled so the ensemble variance equals JohnsonVariance(); the
// per-realization sample variance keeps its 2*BandBins() chi-square spread.
//
// Deterministic in (source, spec).
absl::StatusOr<std::vector<double>> Synthesize(const NoiseSource& source,
                                               const SamplingSpec& spec);

// Upper bound on statistically independent samples in one bit period:
// floor(2 B tau). Only B > 0 and tau >= 0 are required here.
absl::StatusOr<int64_t> IndependentSampleBudget(const SamplingSpec& spec);

// Equivalent number of independent samples in `series`, N / sum_k rho(k)^2,
// where rho is the normalized autocorrelation summed over lags |k| <= N/16
// with a first-order correction for estimator noise. White noise gives ~N,
// band-limited noise gives ~2 B tau.
absl::StatusOr<double> EffectiveDof(std::span<const double> series);

}  // namespace kljn

#endif  // KLJN_NOISEGEN_H_

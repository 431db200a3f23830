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

#include "kljn/noisegen.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "absl/strings/str_cat.h"
#include "fft.h"
#include "kljn/random.h"

namespace kljn {
namespace {

constexpr double kBinEpsilon = 1e-9;

bool AllFinite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

absl::Status SamplingSpec::Validate() const {
  if (!AllFinite({bandwidth_hz, sample_rate_hz, bit_period_s})) {
    return absl::InvalidArgumentError("sampling parameters must be finite");
  }
  if (bandwidth_hz <= 0) {
    return absl::InvalidArgumentError("bandwidth_hz must be > 0");
  }
  if (bit_period_s <= 0) {
    return absl::InvalidArgumentError("bit_period_s must be > 0");
  }
  if (sample_rate_hz < 4.0 * bandwidth_hz) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sample_rate_hz (", sample_rate_hz, ") must be >= 4 * bandwidth_hz (",
        4.0 * bandwidth_hz, "): aliasing risk"));
  }
  if (SampleCount() < 8) {
    return absl::InvalidArgumentError(absl::StrCat(
        "fewer than 8 samples per bit period (N = ", SampleCount(), ")"));
  }
  if (BandBins() < 1) {
    return absl::InvalidArgumentError(
        "bit period too short to resolve any frequency bin inside the band");
  }
  return absl::OkStatus();
}

int SamplingSpec::SampleCount() const {
  return static_cast<int>(std::lround(sample_rate_hz * bit_period_s));
}

int SamplingSpec::BandBins() const {
  const int n = SampleCount();
  const double edge = bandwidth_hz * n / sample_rate_hz;
  const int bins = static_cast<int>(std::floor(edge * (1.0 + kBinEpsilon)));
  // Nyquist stays empty.
  return std::clamp(bins, 0, std::max(0, (n - 1) / 2));
}

std::string_view DistributionName(Distribution d) {
  switch (d) {
    case Distribution::kGaussian:
      return "gaussian";
    case Distribution::kUniform:
      return "uniform";
    case Distribution::kLaplace:
      return "laplace";
  }
  return "unknown";
}

absl::StatusOr<Distribution> ParseDistribution(std::string_view name) {
  for (Distribution d : {Distribution::kGaussian, Distribution::kUniform,
                         Distribution::kLaplace}) {
    if (name == DistributionName(d)) return d;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown noise distribution '", std::string(name), "'"));
}

double MarginalExcessKurtosis(Distribution d) {
  switch (d) {
    case Distribution::kGaussian:
      return 0.0;
    case Distribution::kUniform:
      return -1.2;
    case Distribution::kLaplace:
      return 3.0;
  }
  return 0.0;
}

absl::Status NoiseSource::Validate() const {
  if (!AllFinite({resistance_ohm, temperature_k})) {
    return absl::InvalidArgumentError("noise source parameters must be finite");
  }
  if (resistance_ohm <= 0) {
    return absl::InvalidArgumentError("resistance_ohm must be > 0");
  }
  if (temperature_k < 0) {
    return absl::InvalidArgumentError("temperature_k must be >= 0");
  }
  return absl::OkStatus();
}

double JohnsonVariance(double resistance_ohm, double temperature_k,
                       double bandwidth_hz) {
  return 4.0 * kBoltzmann * temperature_k * resistance_ohm * bandwidth_hz;
}

absl::StatusOr<std::vector<double>> Synthesize(const NoiseSource& source,
                                               const SamplingSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  if (absl::Status s = source.Validate(); !s.ok()) return s;

  const int n = spec.SampleCount();
  const int bins = spec.BandBins();
  std::vector<double> out(n, 0.0);
  const double variance = JohnsonVariance(
      source.resistance_ohm, source.temperature_k, spec.bandwidth_hz);
  if (variance == 0.0) return out;
  const double sigma = std::sqrt(variance);

  Engine engine(source.seed);
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  if (source.distribution == Distribution::kGaussian) {
    // Re and Im ~ N(0, 1) per bin; 4 * bins * h^2 = sigma^2.
    std::normal_distribution<double> normal;
    const double h = sigma / (2.0 * std::sqrt(static_cast<double>(bins)));
    for (int k = 1; k <= bins; ++k) {
      const double re = normal(engine);
      const double im = normal(engine);
      spectrum[k] = {h * re, h * im};
    }
  } else {
    std::vector<double> white(n);
    if (source.distribution == Distribution::kUniform) {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> uniform(-half_width, half_width);
      for (double& x : white) x = uniform(engine);
    } else {
      // Laplace with unit variance: scale 1/sqrt(2).
      std::exponential_distribution<double> expo(std::numbers::sqrt2);
      for (double& x : white) {
        const double magnitude = expo(engine);
        x = (UniformUnit(engine) < 0.5) ? -magnitude : magnitude;
      }
    }
    internal::ForwardRealDft(white, spectrum);
    // E|X_k|^2 = n for unit-variance white input; 2 * bins * n * g^2 = sigma^2.
    const double g =
        sigma / std::sqrt(2.0 * static_cast<double>(bins) * static_cast<double>(n));
    spectrum[0] = 0.0;
    for (int k = 1; k < static_cast<int>(spectrum.size()); ++k) {
      spectrum[k] = (k <= bins) ? spectrum[k] * g : 0.0;
    }
  }
  internal::InverseRealDft(spectrum, out);
  return out;
}

absl::StatusOr<int64_t> IndependentSampleBudget(const SamplingSpec& spec) {
  if (!AllFinite({spec.bandwidth_hz, spec.bit_period_s}) ||
      spec.bandwidth_hz <= 0 || spec.bit_period_s < 0) {
    return absl::InvalidArgumentError(
        "sample budget needs finite bandwidth_hz > 0 and bit_period_s >= 0");
  }
  const double raw = 2.0 * spec.bandwidth_hz * spec.bit_period_s;
  return static_cast<int64_t>(std::floor(raw * (1.0 + kBinEpsilon)));
}

absl::StatusOr<double> EffectiveDof(std::span<const double> series) {
  const size_t n = series.size();
  if (n < 8) {
    return absl::InvalidArgumentError("effective DOF needs at least 8 samples");
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  // Linear autocorrelation through a zero-padded transform.
  const size_t padded = 2 * n;
  std::vector<double> buffer(padded, 0.0);
  for (size_t t = 0; t < n; ++t) buffer[t] = series[t] - mean;
  std::vector<std::complex<double>> spectrum(padded / 2 + 1);
  internal::ForwardRealDft(buffer, spectrum);
  for (auto& c : spectrum) c = std::norm(c);
  internal::InverseRealDft(spectrum, buffer);

  const double lag0 = buffer[0];
  if (!(lag0 > 0.0) || !std::isfinite(lag0)) {
    return absl::FailedPreconditionError(
        "effective DOF undefined for a constant series");
  }
  const size_t max_lag = std::max<size_t>(1, n / 16);
  double sum_sq = 1.0;
  for (size_t k = 1; k <= max_lag; ++k) {
    const double rho = buffer[k] / lag0;
    sum_sq += 2.0 * rho * rho;
  }
  // Each squared lag estimate carries ~sum_sq / n of noise.
  sum_sq /= 1.0 + 2.0 * static_cast<double>(max_lag) / static_cast<double>(n);
  return static_cast<double>(n) / sum_sq;
}

}  // namespace kljn

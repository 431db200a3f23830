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

#include "kljn/summary.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fft.h"
#include "kljn/estimators.h"

namespace kljn {
namespace {

int32_t QuantizeUnsigned(double value, double full_scale, int bits) {
  const int max_code = (1 << bits) - 1;
  const double x = std::clamp(value / full_scale, 0.0, 1.0);
  return static_cast<int32_t>(std::lround(x * max_code));
}

int32_t QuantizeSigned(double value, double full_scale, int bits) {
  const int max_code = (1 << (bits - 1)) - 1;
  const double x = std::clamp(value / full_scale, -1.0, 1.0);
  return static_cast<int32_t>(std::lround(x * max_code));
}

}  // namespace

SketchBasis::SketchBasis(uint64_t seed, size_t length)
    : seed_(seed), length_(length), signs_(kSketchSize * length) {
  Engine engine(seed);
  uint64_t word = 0;
  int left = 0;
  for (int8_t& s : signs_) {
    if (left == 0) {
      word = engine();
      left = 64;
    }
    s = (word & 1u) ? int8_t{1} : int8_t{-1};
    word >>= 1;
    --left;
  }
}

std::array<double, kSketchSize> SketchBasis::Project(
    std::span<const double> x) const {
  std::array<double, kSketchSize> out{};
  const size_t n = std::min(length_, x.size());
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int row = 0; row < kSketchSize; ++row) {
    const int8_t* s = signs_.data() + row * length_;
    double sum = 0.0;
    for (size_t t = 0; t < n; ++t) sum += s[t] * x[t];
    out[row] = sum * norm;
  }
  return out;
}

std::array<double, kSpectralBins> BandEnergyFractions(
    std::span<const double> series, const SamplingSpec& spec) {
  std::array<double, kSpectralBins> out{};
  const size_t n = series.size();
  if (n < 2) return out;
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  internal::ForwardRealDft(series, spectrum);
  const double in_band_width = spec.bandwidth_hz / (kSpectralBins - 1);
  double total = 0.0;
  for (size_t k = 1; k < spectrum.size(); ++k) {
    const double f = spec.sample_rate_hz * static_cast<double>(k) /
                     static_cast<double>(n);
    const double e = std::norm(spectrum[k]);
    // Bins sit exactly on band edges; a relative guard keeps f = B in band.
    int band = static_cast<int>(std::ceil(f / in_band_width * (1.0 - 1e-12))) - 1;
    band = std::clamp(band, 0, kSpectralBins - 1);
    out[band] += e;
    total += e;
  }
  if (total > 0) {
    for (double& e : out) e /= total;
  }
  return out;
}

absl::StatusOr<PartyMeasurement> Measure(std::span<const double> u,
                                         std::span<const double> i,
                                         const SamplingSpec& spec,
                                         const SketchBasis& basis) {
  PartyMeasurement m;
  absl::StatusOr<double> var_u = stats::Variance(u);
  if (!var_u.ok()) return var_u.status();
  absl::StatusOr<double> var_i = stats::Variance(i);
  if (!var_i.ok()) return var_i.status();
  absl::StatusOr<double> cross = stats::CrossPower(u, i);
  if (!cross.ok()) return cross.status();
  m.var_u = *var_u;
  m.var_i = *var_i;
  m.cross_ui = *cross;
  absl::StatusOr<double> kurt = stats::ExcessKurtosis(u);
  m.kurtosis_u = kurt.ok() ? *kurt : 0.0;
  m.spectrum_u = BandEnergyFractions(u, spec);
  m.spectrum_i = BandEnergyFractions(i, spec);
  m.sketch_u = basis.Project(u);
  m.sketch_i = basis.Project(i);
  return m;
}

Summary Quantize(const PartyMeasurement& m, const SummaryScales& scales,
                 Party party) {
  Summary s;
  s.party = party;
  s.bits = scales.bits;
  s.var_u = QuantizeUnsigned(m.var_u, scales.var_u_full, scales.bits);
  s.var_i = QuantizeUnsigned(m.var_i, scales.var_i_full, scales.bits);
  for (int k = 0; k < kSpectralBins; ++k) {
    s.spectrum_u[k] = QuantizeUnsigned(m.spectrum_u[k], 1.0, scales.bits);
    s.spectrum_i[k] = QuantizeUnsigned(m.spectrum_i[k], 1.0, scales.bits);
  }
  for (int k = 0; k < kSketchSize; ++k) {
    s.sketch_u[k] = QuantizeSigned(m.sketch_u[k], scales.sketch_u_full, scales.bits);
    s.sketch_i[k] = QuantizeSigned(m.sketch_i[k], scales.sketch_i_full, scales.bits);
  }
  return s;
}

double DequantizeUnsigned(int32_t code, double full_scale, int bits) {
  return full_scale * static_cast<double>(code) / ((1 << bits) - 1);
}

double DequantizeSigned(int32_t code, double full_scale, int bits) {
  return full_scale * static_cast<double>(code) / ((1 << (bits - 1)) - 1);
}

}  // namespace kljn

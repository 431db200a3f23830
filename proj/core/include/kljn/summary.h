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

#ifndef KLJN_SUMMARY_H_
#define KLJN_SUMMARY_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "kljn/noisegen.h"
#include "kljn/random.h"

namespace kljn {

inline constexpr int kSpectralBins = 8;
inline constexpr int kSketchSize = 8;

// Public +/-1 projection vectors. The seed is announced only after the bit
// period ends, so an injected waveform cannot be shaped to avoid them.
class SketchBasis {
 public:
  SketchBasis(uint64_t seed, size_t length);

  // <row, x> / sqrt(N): same RMS as x for any x.
  std::array<double, kSketchSize> Project(std::span<const double> x) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  size_t length_;
  std::vector<int8_t> signs_;  // kSketchSize rows of `length_`
};

// What one party measures at its own end of the wire. Private until
// quantized into a Summary.
struct PartyMeasurement {
  double var_u = 0.0;
  double var_i = 0.0;
  double cross_ui = 0.0;
  double kurtosis_u = 0.0;
  // Energy fractions: seven equal bins over (0, B], then (B, fs/2].
  std::array<double, kSpectralBins> spectrum_u{};
  std::array<double, kSpectralBins> spectrum_i{};
  std::array<double, kSketchSize> sketch_u{};
  std::array<double, kSketchSize> sketch_i{};
};

absl::StatusOr<PartyMeasurement> Measure(std::span<const double> u,
                                         std::span<const double> i,
                                         const SamplingSpec& spec,
                                         const SketchBasis& basis);

// Energy fractions of `series` in the kSpectralBins bands above.
std::array<double, kSpectralBins> BandEnergyFractions(
    std::span<const double> series, const SamplingSpec& spec);

// Full-scale values for fixed-point quantization. All are functions of
// public parameters only.
struct SummaryScales {
  double var_u_full = 1.0;
  double var_i_full = 1.0;
  double sketch_u_full = 1.0;
  double sketch_i_full = 1.0;
  int bits = 12;

  // Largest signed code, 2^(bits-1) - 1.
  int MaxSignedCode() const { return (1 << (bits - 1)) - 1; }
  // Largest unsigned code, 2^bits - 1.
  int MaxUnsignedCode() const { return (1 << bits) - 1; }
};

// The quantized statistics a party publishes after each exchange.
struct Summary {
  Party party = Party::kAlice;
  int bits = 12;
  int32_t var_u = 0;
  int32_t var_i = 0;
  std::array<int32_t, kSpectralBins> spectrum_u{};
  std::array<int32_t, kSpectralBins> spectrum_i{};
  std::array<int32_t, kSketchSize> sketch_u{};
  std::array<int32_t, kSketchSize> sketch_i{};

  bool operator==(const Summary&) const = default;
};

Summary Quantize(const PartyMeasurement& m, const SummaryScales& scales,
                 Party party);

// Inverse maps, code -> physical value.
double DequantizeUnsigned(int32_t code, double full_scale, int bits);
double DequantizeSigned(int32_t code, double full_scale, int bits);

}  // namespace kljn

#endif  // KLJN_SUMMARY_H_

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

#include "kljn/estimators.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "boost/math/distributions/normal.hpp"
#include "fft.h"

namespace kljn::stats {
namespace {

absl::Status CheckSameLength(std::span<const double> a,
                             std::span<const double> b) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "series length mismatch: ", a.size(), " vs ", b.size()));
  }
  return absl::OkStatus();
}

}  // namespace

double Mean(std::span<const double> series) {
  if (series.empty()) return 0.0;
  double sum = 0.0;
  for (double x : series) sum += x;
  return sum / static_cast<double>(series.size());
}

absl::StatusOr<double> Variance(std::span<const double> series) {
  if (series.size() < 2) {
    return absl::InvalidArgumentError("variance needs at least 2 samples");
  }
  const double mean = Mean(series);
  double sum_sq = 0.0;
  for (double x : series) sum_sq += (x - mean) * (x - mean);
  return sum_sq / static_cast<double>(series.size() - 1);
}

absl::StatusOr<double> CrossPower(std::span<const double> u,
                                  std::span<const double> i) {
  if (absl::Status s = CheckSameLength(u, i); !s.ok()) return s;
  if (u.empty()) return absl::InvalidArgumentError("empty series");
  double sum = 0.0;
  for (size_t t = 0; t < u.size(); ++t) sum += u[t] * i[t];
  return sum / static_cast<double>(u.size());
}

absl::StatusOr<double> Covariance(std::span<const double> a,
                                  std::span<const double> b) {
  if (absl::Status s = CheckSameLength(a, b); !s.ok()) return s;
  if (a.size() < 2) {
    return absl::InvalidArgumentError("covariance needs at least 2 samples");
  }
  const double ma = Mean(a);
  const double mb = Mean(b);
  double sum = 0.0;
  for (size_t t = 0; t < a.size(); ++t) sum += (a[t] - ma) * (b[t] - mb);
  return sum / static_cast<double>(a.size() - 1);
}

double VarianceStandardError(double variance, double n_eff) {
  return variance * std::sqrt(2.0 / n_eff);
}

double CrossPowerStandardError(double var_u, double var_i, double cross,
                               double n_eff) {
  return std::sqrt((var_u * var_i + cross * cross) / n_eff);
}

absl::StatusOr<VarianceDifference> VarianceDifferenceOf(
    std::span<const double> a, std::span<const double> b, double n_eff) {
  if (absl::Status s = CheckSameLength(a, b); !s.ok()) return s;
  if (a.size() < 2) {
    return absl::InvalidArgumentError("variance difference needs 2 samples");
  }
  const double ma = Mean(a);
  const double mb = Mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t t = 0; t < a.size(); ++t) {
    const double da = a[t] - ma;
    const double db = b[t] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  const double denom = static_cast<double>(a.size() - 1);
  const double va = saa / denom;
  const double vb = sbb / denom;
  const double cab = sab / denom;
  VarianceDifference out;
  out.difference = va - vb;
  const double spread = std::max(0.0, va * va + vb * vb - 2.0 * cab * cab);
  out.standard_error = std::sqrt(2.0 * spread / n_eff);
  return out;
}

absl::StatusOr<double> ExcessKurtosis(std::span<const double> series) {
  if (series.size() < 4) {
    return absl::InvalidArgumentError("kurtosis needs at least 4 samples");
  }
  const double mean = Mean(series);
  double m2 = 0.0, m4 = 0.0;
  for (double x : series) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(series.size());
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) {
    return absl::FailedPreconditionError("kurtosis undefined for a constant series");
  }
  return m4 / (m2 * m2) - 3.0;
}

double KurtosisStandardError(double n_eff) { return std::sqrt(24.0 / n_eff); }

absl::StatusOr<double> JointCumulant31(std::span<const double> u,
                                       std::span<const double> i) {
  if (absl::Status s = CheckSameLength(u, i); !s.ok()) return s;
  if (u.size() < 100) {
    return absl::InvalidArgumentError(
        "fourth-order cumulant needs at least 100 samples");
  }
  const double mu = Mean(u);
  const double mi = Mean(i);
  double uuui = 0.0, uu = 0.0, ui = 0.0;
  for (size_t t = 0; t < u.size(); ++t) {
    const double du = u[t] - mu;
    const double di = i[t] - mi;
    const double du2 = du * du;
    uu += du2;
    ui += du * di;
    uuui += du2 * du * di;
  }
  const double n = static_cast<double>(u.size());
  return uuui / n - 3.0 * (uu / n) * (ui / n);
}

double SpectralEstimate::BinWidth() const {
  return frequency_hz.empty() ? 0.0 : frequency_hz.front();
}

double SpectralEstimate::Integral() const {
  double sum = 0.0;
  for (double p : density) sum += p;
  return sum * BinWidth();
}

double SpectralEstimate::IntegralBetween(double lo_hz, double hi_hz) const {
  double sum = 0.0;
  for (size_t k = 0; k < density.size(); ++k) {
    if (frequency_hz[k] > lo_hz && frequency_hz[k] <= hi_hz) sum += density[k];
  }
  return sum * BinWidth();
}

absl::StatusOr<SpectralEstimate> Psd(std::span<const double> series,
                                     double sample_rate_hz, int segments) {
  if (segments < 1) {
    return absl::InvalidArgumentError("segments must be >= 1");
  }
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    return absl::InvalidArgumentError("sample_rate_hz must be finite and > 0");
  }
  if (series.size() < 2 * static_cast<size_t>(segments)) {
    return absl::InvalidArgumentError("series shorter than 2 x segments");
  }
  // K segments with 50% overlap of length 2*hop cover (K + 1) * hop samples.
  const size_t hop = series.size() / static_cast<size_t>(segments + 1);
  const size_t length = 2 * hop;
  if (length < 32) {
    return absl::InvalidArgumentError(absl::StrCat(
        "only ", length, " samples per segment; need at least 32"));
  }

  std::vector<double> window(length);
  double window_power = 0.0;
  for (size_t t = 0; t < length; ++t) {
    window[t] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(t) /
                                      static_cast<double>(length)));
    window_power += window[t] * window[t];
  }

  const size_t half = length / 2;
  SpectralEstimate estimate;
  estimate.segments = segments;
  estimate.frequency_hz.resize(half);
  estimate.density.assign(half, 0.0);
  for (size_t k = 1; k <= half; ++k) {
    estimate.frequency_hz[k - 1] =
        sample_rate_hz * static_cast<double>(k) / static_cast<double>(length);
  }

  std::vector<double> segment(length);
  std::vector<std::complex<double>> spectrum(half + 1);
  for (int s = 0; s < segments; ++s) {
    const auto piece = series.subspan(static_cast<size_t>(s) * hop, length);
    const double mean = Mean(piece);
    for (size_t t = 0; t < length; ++t) {
      segment[t] = (piece[t] - mean) * window[t];
    }
    internal::ForwardRealDft(segment, spectrum);
    for (size_t k = 1; k <= half; ++k) {
      const double one_sided = (k == half) ? 1.0 : 2.0;
      estimate.density[k - 1] += one_sided * std::norm(spectrum[k]);
    }
  }
  const double scale =
      1.0 / (static_cast<double>(segments) * sample_rate_hz * window_power);
  for (double& p : estimate.density) p *= scale;
  return estimate;
}

double NormalCriticalValue(double level) {
  static const boost::math::normal_distribution<double> kStandard;
  return boost::math::quantile(kStandard, 0.5 + level / 2.0);
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

absl::StatusOr<Interval> WilsonInterval(int64_t successes, int64_t trials,
                                        double level) {
  if (trials < 1 || successes < 0 || successes > trials) {
    return absl::InvalidArgumentError(absl::StrCat(
        "invalid binomial counts: ", successes, " of ", trials));
  }
  if (!(level > 0.0 && level < 1.0)) {
    return absl::InvalidArgumentError("confidence level must be in (0, 1)");
  }
  const double z = NormalCriticalValue(level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) out.lo = 0.0;
  if (successes == trials) out.hi = 1.0;
  return out;
}

double BinaryEntropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double BinarySymmetricCapacity(double accuracy) {
  return 1.0 - BinaryEntropy(accuracy);
}

}  // namespace kljn::stats

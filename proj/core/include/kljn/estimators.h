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

#ifndef KLJN_ESTIMATORS_H_
#define KLJN_ESTIMATORS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

// Statistical kernels shared by the simulator, the parties and the
// eavesdropper. Standard errors are always computed against an effective
// number of independent samples `n_eff` (2 B tau for band-limited traces),
// never against the raw sample count.
namespace kljn::stats {

double Mean(std::span<const double> series);

// Unbiased sample variance. Needs at least two samples.
absl::StatusOr<double> Variance(std::span<const double> series);

// Sample mean of u(t) * i(t), no mean removal.
absl::StatusOr<double> CrossPower(std::span<const double> u,
                                  std::span<const double> i);

// Sample covariance (means removed, 1/(N-1)).
absl::StatusOr<double> Covariance(std::span<const double> a,
                                  std::span<const double> b);

// SE of a Gaussian-process variance estimate: variance * sqrt(2 / n_eff).
double VarianceStandardError(double variance, double n_eff);

// SE of the mean of u*i for jointly Gaussian u, i:
// sqrt((var_u var_i + cross^2) / n_eff).
double CrossPowerStandardError(double var_u, double var_i, double cross,
                               double n_eff);

struct VarianceDifference {
  double difference = 0.0;      // Var(a) - Var(b)
  double standard_error = 0.0;  // sqrt(2 (Va^2 + Vb^2 - 2 C^2) / n_eff)
};

// Difference of two correlated variances with its Gaussian standard error.
absl::StatusOr<VarianceDifference> VarianceDifferenceOf(
    std::span<const double> a, std::span<const double> b, double n_eff);

// Excess kurtosis m4 / m2^2 - 3 with means removed.
absl::StatusOr<double> ExcessKurtosis(std::span<const double> series);

// sqrt(24 / n_eff).
double KurtosisStandardError(double n_eff);

// cum(u, u, u, i) = <u^3 i> - 3 <u^2> <u i> after removing both means.
// Needs equal lengths and N >= 100.
absl::StatusOr<double> JointCumulant31(std::span<const double> u,
                                       std::span<const double> i);

struct SpectralEstimate {
  std::vector<double> frequency_hz;  // bins 1..L/2, spanning (0, fs/2]
  std::vector<double> density;       // one-sided, units^2 / Hz
  int segments = 0;
  std::string window = "hann";

  double BinWidth() const;
  // Sum of density * bin width; equals the series variance.
  double Integral() const;
  // Integral restricted to lo < f <= hi.
  double IntegralBetween(double lo_hz, double hi_hz) const;
};

// Averaged periodogram: `segments` Hann-windowed segments with 50% overlap,
// segment means removed, normalized so the integral over (0, fs/2] equals the
// variance (window power compensated).
absl::StatusOr<SpectralEstimate> Psd(std::span<const double> series,
                                     double sample_rate_hz, int segments);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool Contains(double x) const { return lo <= x && x <= hi; }
  double Width() const { return hi - lo; }
};

// Wilson score interval for a binomial proportion at two-sided `level`.
absl::StatusOr<Interval> WilsonInterval(int64_t successes, int64_t trials,
                                        double level);

// Two-sided standard normal critical value, e.g. 1.95996 for level 0.95.
double NormalCriticalValue(double level);

double NormalCdf(double z);

// H2(p) in bits.
double BinaryEntropy(double p);

// Capacity of a binary symmetric channel whose correct-guess probability is
// `accuracy`: 1 - H2(accuracy). Zero at 1/2.
double BinarySymmetricCapacity(double accuracy);

}  // namespace kljn::stats

#endif  // KLJN_ESTIMATORS_H_

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

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fft.h"
#include "gtest/gtest.h"
#include "kljn/estimators.h"
#include "kljn/random.h"

namespace kljn {
namespace {

std::vector<double> Pooled(const NoiseSource& base, const SamplingSpec& spec,
                           int64_t min_samples) {
  std::vector<double> out;
  NoiseSource source = base;
  for (uint64_t r = 0; static_cast<int64_t>(out.size()) < min_samples; ++r) {
    source.seed = DeriveSeed(base.seed, r, Party::kHarness, StreamRole::kCalibration);
    std::vector<double> x = *Synthesize(source, spec);
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

TEST(SamplingSpecTest, DefaultsGiveTheReferenceGrid) {
  SamplingSpec spec;
  ASSERT_TRUE(spec.Validate().ok());
  EXPECT_EQ(spec.SampleCount(), 4096);
  EXPECT_EQ(spec.BandBins(), 500);
}

TEST(SamplingSpecTest, RejectsAliasingAndDegenerateGrids) {
  SamplingSpec spec;
  spec.sample_rate_hz = 3.9 * spec.bandwidth_hz;
  EXPECT_EQ(spec.Validate().code(), absl::StatusCode::kInvalidArgument);
  spec = SamplingSpec{};
  spec.bit_period_s = 7.0 / spec.sample_rate_hz;  // N = 7
  EXPECT_FALSE(spec.Validate().ok());
  spec = SamplingSpec{};
  spec.bandwidth_hz = NAN;
  EXPECT_FALSE(spec.Validate().ok());
  spec = SamplingSpec{};
  spec.bit_period_s = INFINITY;
  EXPECT_FALSE(spec.Validate().ok());
  spec = SamplingSpec{};
  spec.bandwidth_hz = 0.0;
  EXPECT_FALSE(spec.Validate().ok());
}

TEST(NoiseSourceTest, Validation) {
  NoiseSource s{.resistance_ohm = 1e4, .temperature_k = 0.0};
  EXPECT_TRUE(s.Validate().ok());
  s.resistance_ohm = 0.0;
  EXPECT_FALSE(s.Validate().ok());
  s = {.resistance_ohm = 1e4, .temperature_k = -1.0};
  EXPECT_FALSE(s.Validate().ok());
  s = {.resistance_ohm = 1e4, .temperature_k = NAN};
  EXPECT_FALSE(s.Validate().ok());
}

TEST(JohnsonVarianceTest, ReferenceValue) {
  // 4 * 1.380649e-23 * 1e15 * 1e4 * 5e3, oracle script.
  EXPECT_NEAR(JohnsonVariance(1e4, 1e15, 5e3), 2.761298, 1e-12);
  EXPECT_EQ(JohnsonVariance(1e4, 0.0, 5e3), 0.0);
}

TEST(SynthesizeTest, ZeroTemperatureIsSilent) {
  std::vector<double> x =
      *Synthesize({.resistance_ohm = 1e4, .temperature_k = 0.0, .seed = 5},
                  SamplingSpec{});
  ASSERT_EQ(x.size(), 4096u);
  for (double v : x) ASSERT_EQ(v, 0.0);
}

TEST(SynthesizeTest, DeterministicInSeed) {
  NoiseSource s{.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 99};
  for (Distribution d :
       {Distribution::kGaussian, Distribution::kUniform, Distribution::kLaplace}) {
    s.distribution = d;
    EXPECT_EQ(*Synthesize(s, SamplingSpec{}), *Synthesize(s, SamplingSpec{}));
  }
  NoiseSource other = s;
  other.seed = 100;
  EXPECT_NE(*Synthesize(s, SamplingSpec{}), *Synthesize(other, SamplingSpec{}));
}

TEST(SynthesizeTest, RejectsInvalidInputs) {
  SamplingSpec aliasing;
  aliasing.sample_rate_hz = 10000.0;
  EXPECT_FALSE(
      Synthesize({.resistance_ohm = 1e4, .temperature_k = 1e15}, aliasing).ok());
  EXPECT_FALSE(
      Synthesize({.resistance_ohm = -1, .temperature_k = 1e15}, SamplingSpec{}).ok());
}

TEST(SynthesizeTest, JohnsonVarianceOverAMillionSamples) {
  for (Distribution d :
       {Distribution::kGaussian, Distribution::kUniform, Distribution::kLaplace}) {
    NoiseSource s{.resistance_ohm = 1e4, .temperature_k = 1e15,
                  .distribution = d, .seed = 11};
    std::vector<double> x = Pooled(s, SamplingSpec{}, 1'000'000);
    ASSERT_GE(x.size(), 1'000'000u);
    const double var = *stats::Variance(x);
    EXPECT_NEAR(var / 2.761298, 1.0, 0.03) << DistributionName(d);
    EXPECT_NEAR(stats::Mean(x), 0.0, 1e-9);
  }
}

TEST(SynthesizeTest, DoublingTemperatureDoublesVariance) {
  NoiseSource cold{.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 1};
  NoiseSource hot{.resistance_ohm = 1e4, .temperature_k = 2e15, .seed = 2};
  const double ratio = *stats::Variance(Pooled(hot, SamplingSpec{}, 1'000'000)) /
                       *stats::Variance(Pooled(cold, SamplingSpec{}, 1'000'000));
  EXPECT_NEAR(ratio, 2.0, 2.0 * 0.02);
}

TEST(SynthesizeTest, BrickWallSpectrumIsExact) {
  SamplingSpec spec;
  std::vector<double> x = *Synthesize(
      {.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 4}, spec);
  std::vector<std::complex<double>> bins(x.size() / 2 + 1);
  internal::ForwardRealDft(x, bins);
  double in_band = 0.0, out_band = 0.0;
  for (size_t k = 0; k < bins.size(); ++k) {
    const double p = std::norm(bins[k]);
    if (k >= 1 && k <= static_cast<size_t>(spec.BandBins())) {
      in_band += p;
    } else {
      out_band += p;
    }
  }
  EXPECT_GT(in_band, 0.0);
  EXPECT_LT(out_band, 1e-20 * in_band);
}

TEST(SynthesizeTest, PsdIsFlatAndConsistentAtLargeN) {
  SamplingSpec spec;
  spec.bit_period_s = 65536 / spec.sample_rate_hz;
  std::vector<double> x = *Synthesize(
      {.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 8}, spec);
  ASSERT_EQ(x.size(), 65536u);
  stats::SpectralEstimate psd = *stats::Psd(x, spec.sample_rate_hz, 64);
  const double var = *stats::Variance(x);
  const double b = spec.bandwidth_hz;
  // Parseval: mean in-band density times B equals the sample variance.
  EXPECT_NEAR(psd.IntegralBetween(0.0, b) / var, 1.0, 0.05);
  // Leakage above 1.25 B.
  EXPECT_LT(psd.IntegralBetween(1.25 * b, spec.sample_rate_hz / 2), 0.01 * var);
  // Flat within 10% on four sub-bands away from the edge.
  for (int k = 0; k < 4; ++k) {
    const double lo = b * (0.05 + 0.225 * k), hi = lo + 0.225 * b;
    EXPECT_NEAR(psd.IntegralBetween(lo, hi) / (hi - lo) / (var / b), 1.0, 0.10);
  }
}

TEST(SynthesizeTest, GaussianSourceHasNoExcessKurtosis) {
  NoiseSource s{.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 21};
  std::vector<double> x = Pooled(s, SamplingSpec{}, 400'000);
  EXPECT_LT(std::abs(*stats::ExcessKurtosis(x)), 0.1);
}

// Band-limiting shrinks the marginal kurtosis by sum h^4 / (sum h^2)^2,
// 0.16252 for the default grid (oracle script).
TEST(SynthesizeTest, NonGaussianKurtosisMatchesFilteredOracle) {
  constexpr double kFactor = 0.16251684570312866;
  struct Case {
    Distribution d;
    double marginal;
  };
  for (Case c : {Case{Distribution::kUniform, -1.2},
                 Case{Distribution::kLaplace, 3.0}}) {
    EXPECT_EQ(MarginalExcessKurtosis(c.d), c.marginal);
    NoiseSource s{.resistance_ohm = 1e4, .temperature_k = 1e15,
                  .distribution = c.d, .seed = 31};
    std::vector<double> x = Pooled(s, SamplingSpec{}, 2'000'000);
    // n_eff ~ 2000 * 245 -> SE ~ 0.007 for Gaussian-like tails.
    EXPECT_NEAR(*stats::ExcessKurtosis(x), c.marginal * kFactor,
                4 * std::sqrt(24.0 / 490'000) * (c.d == Distribution::kLaplace ? 2 : 1))
        << DistributionName(c.d);
  }
  EXPECT_EQ(MarginalExcessKurtosis(Distribution::kGaussian), 0.0);
}

TEST(DistributionTest, NamesRoundTrip) {
  for (Distribution d :
       {Distribution::kGaussian, Distribution::kUniform, Distribution::kLaplace}) {
    EXPECT_EQ(*ParseDistribution(DistributionName(d)), d);
  }
  EXPECT_FALSE(ParseDistribution("cauchy").ok());
}

TEST(IndependentSampleBudgetTest, FloorOfTwoBTau) {
  EXPECT_EQ(*IndependentSampleBudget({.bandwidth_hz = 5000, .bit_period_s = 0.1}),
            1000);
  EXPECT_EQ(*IndependentSampleBudget({.bandwidth_hz = 500, .bit_period_s = 0.001}),
            1);
  EXPECT_EQ(*IndependentSampleBudget({.bandwidth_hz = 500, .bit_period_s = 0.0}),
            0);
  EXPECT_EQ(*IndependentSampleBudget({.bandwidth_hz = 5000, .bit_period_s = 0.00015}),
            1);
  EXPECT_FALSE(IndependentSampleBudget({.bandwidth_hz = 0, .bit_period_s = 1}).ok());
  EXPECT_FALSE(IndependentSampleBudget({.bandwidth_hz = 10, .bit_period_s = -1}).ok());
}

TEST(EffectiveDofTest, WhiteNoiseGivesSampleCount) {
  std::mt19937_64 engine(17);
  std::normal_distribution<double> normal;
  std::vector<double> x(4096);
  for (double& v : x) v = normal(engine);
  EXPECT_NEAR(*EffectiveDof(x) / 4096.0, 1.0, 0.10);
}

TEST(EffectiveDofTest, BandLimitedNoiseGivesTwoBTau) {
  SamplingSpec spec{.bandwidth_hz = 1000, .sample_rate_hz = 8000, .bit_period_s = 0.5};
  double sum = 0.0;
  constexpr int kRealizations = 100;
  for (int r = 0; r < kRealizations; ++r) {
    sum += *EffectiveDof(*Synthesize(
        {.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 1000u + r}, spec));
  }
  EXPECT_NEAR(sum / kRealizations / 1000.0, 1.0, 0.15);
}

TEST(EffectiveDofTest, ConstantSeriesIsAnError) {
  std::vector<double> x(100, 3.0);
  EXPECT_FALSE(EffectiveDof(x).ok());
  EXPECT_FALSE(EffectiveDof(std::vector<double>(4, 1.0)).ok());
}

}  // namespace
}  // namespace kljn

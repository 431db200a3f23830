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

#include "kljn/eve.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "kljn/defense.h"
#include "kljn/random.h"

namespace kljn::eve {
namespace {

constexpr double kHaoCrossPowerGap = 0.25;

// True when two analytic predictions differ beyond rounding.
bool Distinct(double a, double b) {
  return std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b));
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

AttackGuess CoinFlip(uint64_t seed, int64_t exchange, AttackKind kind) {
  Engine engine = MakeEngine(seed, static_cast<uint64_t>(exchange), Party::kEve,
                             StreamRole::kTieBreak, static_cast<uint32_t>(kind));
  AttackGuess g;
  g.guess = UniformUnit(engine) < 0.5 ? Guess::kAliceLow : Guess::kAliceHigh;
  g.confidence = 0.5;
  g.coin_flip = true;
  return g;
}

AttackGuess FromLlr(double llr, uint64_t seed, int64_t exchange,
                    AttackKind kind) {
  if (llr == 0.0 || !std::isfinite(llr)) return CoinFlip(seed, exchange, kind);
  AttackGuess g;
  g.llr = llr;
  g.guess = llr > 0 ? Guess::kAliceLow : Guess::kAliceHigh;
  g.confidence = Sigmoid(std::abs(llr));
  return g;
}

absl::StatusOr<defense::MixHypotheses> Hypotheses(const PublicParameters& p) {
  return defense::ComputeMixHypotheses(
      p.pair.low_ohm, p.pair.high_ohm, p.temperatures.alice_k,
      p.temperatures.bob_k, p.wire_ohm, p.sampling.bandwidth_hz,
      p.tap_fraction);
}

double MixCurrentVariance(const defense::MixHypotheses& h) {
  return 0.5 * (h.alice_low.var_i + h.alice_high.var_i);
}

// Adds one Gaussian LLR term when the two predictions differ.
void AddTerm(double x, double mu_low, double mu_high, double se, double& llr,
             bool& informative) {
  if (!Distinct(mu_low, mu_high) || !(se > 0)) return;
  llr += defense::GaussianLogLikelihoodRatio(x, mu_low, mu_high, se);
  informative = true;
}

}  // namespace

PublicParameters PublicParameters::FromSession(const SessionConfig& config) {
  PublicParameters p;
  p.sampling = config.sampling;
  p.pair = config.pair;
  p.temperatures = config.temperatures;
  p.wire_ohm = config.wire_ohm;
  p.tap_fraction = config.tap_fraction;
  p.distribution = config.distribution;
  return p;
}

absl::StatusOr<EveView> EveView::Create(int64_t exchange, const Trace& trace,
                                        const PublicParameters& params,
                                        std::span<const PublicMessage> log) {
  const size_t n = trace.size();
  if (n == 0 || trace.u_bob.size() != n || trace.u_mid.size() != n ||
      trace.i_alice.size() != n || trace.i_bob.size() != n) {
    return absl::InvalidArgumentError("trace series lengths differ");
  }
  absl::StatusOr<int64_t> budget = IndependentSampleBudget(params.sampling);
  if (!budget.ok()) return budget.status();
  EveView view;
  view.exchange_ = exchange;
  view.trace_ = &trace;
  view.params_ = &params;
  view.log_ = log;
  view.n_eff_ = static_cast<double>(std::max<int64_t>(*budget, 1));
  return view;
}

std::string_view GuessName(Guess g) {
  switch (g) {
    case Guess::kAbstain:
      return "abstain";
    case Guess::kAliceLow:
      return "AliceL";
    case Guess::kAliceHigh:
      return "AliceH";
  }
  return "?";
}

std::string_view AttackName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kPassiveLevel:
      return "passive";
    case AttackKind::kScheuerYariv:
      return "scheuer_yariv";
    case AttackKind::kHao:
      return "hao";
    case AttackKind::kCumulant:
      return "cumulant";
    case AttackKind::kInjection:
      return "injection";
  }
  return "?";
}

absl::StatusOr<AttackKind> ParseAttack(std::string_view name) {
  for (int k = 0; k < kAttackKinds; ++k) {
    if (AttackName(static_cast<AttackKind>(k)) == name) {
      return static_cast<AttackKind>(k);
    }
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown attack '", std::string(name), "'"));
}

absl::StatusOr<Level> ClassifyFromTap(const EveView& view) {
  const PublicParameters& p = view.params();
  absl::StatusOr<LevelClassifier> classifier = LevelClassifier::Create(
      p.pair, p.temperatures, p.sampling.bandwidth_hz, p.wire_ohm, End::kMid,
      Statistic::kVoltageVariance, p.tap_fraction);
  if (!classifier.ok()) return classifier.status();
  absl::StatusOr<double> var = stats::Variance(view.u_mid());
  if (!var.ok()) return var.status();
  return classifier->Classify(*var);
}

absl::StatusOr<AttackGuess> PassiveLevelAttack(const EveView& view,
                                               uint64_t attack_seed) {
  absl::StatusOr<defense::MixHypotheses> h = Hypotheses(view.params());
  if (!h.ok()) return h.status();
  absl::StatusOr<double> var_ua = stats::Variance(view.u_alice());
  absl::StatusOr<double> var_ub = stats::Variance(view.u_bob());
  absl::StatusOr<double> var_i = stats::Variance(view.i_alice());
  absl::StatusOr<double> cross = stats::CrossPower(view.u_alice(), view.i_alice());
  for (const absl::Status& s :
       {var_ua.status(), var_ub.status(), var_i.status(), cross.status()}) {
    if (!s.ok()) return s;
  }
  const LoopMoments& lo = h->alice_low;
  const LoopMoments& hi = h->alice_high;
  const double n = view.n_eff();
  auto mid = [](double a, double b) { return 0.5 * (a + b); };
  double llr = 0.0;
  bool informative = false;
  AddTerm(*var_ua, lo.var_u_alice, hi.var_u_alice,
          stats::VarianceStandardError(mid(lo.var_u_alice, hi.var_u_alice), n),
          llr, informative);
  AddTerm(*var_ub, lo.var_u_bob, hi.var_u_bob,
          stats::VarianceStandardError(mid(lo.var_u_bob, hi.var_u_bob), n), llr,
          informative);
  AddTerm(*var_i, lo.var_i, hi.var_i,
          stats::VarianceStandardError(mid(lo.var_i, hi.var_i), n), llr,
          informative);
  AddTerm(*cross, lo.cross_power, hi.cross_power,
          stats::CrossPowerStandardError(mid(lo.var_u_alice, hi.var_u_alice),
                                         mid(lo.var_i, hi.var_i),
                                         mid(lo.cross_power, hi.cross_power), n),
          llr, informative);
  if (!informative) {
    return CoinFlip(attack_seed, view.exchange(), AttackKind::kPassiveLevel);
  }
  return FromLlr(llr, attack_seed, view.exchange(), AttackKind::kPassiveLevel);
}

absl::StatusOr<AttackGuess> ScheuerYarivAttack(const EveView& view,
                                               uint64_t attack_seed) {
  const AttackKind kind = AttackKind::kScheuerYariv;
  if (!(view.params().wire_ohm > 0)) {
    return CoinFlip(attack_seed, view.exchange(), kind);
  }
  absl::StatusOr<defense::MixHypotheses> h = Hypotheses(view.params());
  if (!h.ok()) return h.status();
  absl::StatusOr<stats::VarianceDifference> diff =
      stats::VarianceDifferenceOf(view.u_alice(), view.u_bob(), view.n_eff());
  if (!diff.ok()) return diff.status();
  const double mu_low = h->alice_low.var_u_alice - h->alice_low.var_u_bob;
  const double mu_high = h->alice_high.var_u_alice - h->alice_high.var_u_bob;
  if (!Distinct(mu_low, mu_high) || diff->difference == 0.0) {
    return CoinFlip(attack_seed, view.exchange(), kind);
  }
  const double llr = defense::GaussianLogLikelihoodRatio(
      diff->difference, mu_low, mu_high, diff->standard_error);
  AttackGuess g;
  g.llr = llr;
  g.guess = diff->difference > 0 ? Guess::kAliceHigh : Guess::kAliceLow;
  const double p_low = Sigmoid(llr);
  g.confidence = g.guess == Guess::kAliceLow ? p_low : 1.0 - p_low;
  return g;
}

absl::StatusOr<AttackGuess> HaoTemperatureAttack(const EveView& view,
                                                 uint64_t attack_seed) {
  const AttackKind kind = AttackKind::kHao;
  const Temperatures& t = view.params().temperatures;
  if (!Distinct(t.alice_k, t.bob_k)) {
    return CoinFlip(attack_seed, view.exchange(), kind);
  }
  absl::StatusOr<defense::MixHypotheses> h = Hypotheses(view.params());
  if (!h.ok()) return h.status();
  absl::StatusOr<double> var_i = stats::Variance(view.i_alice());
  if (!var_i.ok()) return var_i.status();
  const LoopMoments& lo = h->alice_low;
  const LoopMoments& hi = h->alice_high;
  const double n = view.n_eff();
  double llr = 0.0;
  bool informative = false;
  AddTerm(*var_i, lo.var_i, hi.var_i,
          stats::VarianceStandardError(MixCurrentVariance(*h), n), llr,
          informative);
  const double gap =
      std::abs(t.alice_k - t.bob_k) / std::max(t.alice_k, t.bob_k);
  if (gap >= kHaoCrossPowerGap) {
    absl::StatusOr<double> cross =
        stats::CrossPower(view.u_mid(), view.i_alice());
    if (!cross.ok()) return cross.status();
    AddTerm(*cross, lo.cross_power_mid, hi.cross_power_mid,
            stats::CrossPowerStandardError(
                0.5 * (lo.var_u_mid + hi.var_u_mid), MixCurrentVariance(*h),
                0.5 * (lo.cross_power_mid + hi.cross_power_mid), n),
            llr, informative);
  }
  if (!informative) return CoinFlip(attack_seed, view.exchange(), kind);
  return FromLlr(llr, attack_seed, view.exchange(), kind);
}

absl::StatusOr<AttackGuess> HigherOrderCumulantAttack(const EveView& view,
                                                      uint64_t attack_seed) {
  const AttackKind kind = AttackKind::kCumulant;
  if (view.u_alice().size() < 100) return AttackGuess{};
  absl::StatusOr<double> cum =
      stats::JointCumulant31(view.u_alice(), view.i_alice());
  if (!cum.ok()) return cum.status();
  // Reference sign: the public generator kurtosis, or the measured one when
  // the public marginal is Gaussian.
  double reference = MarginalExcessKurtosis(view.params().distribution);
  if (reference == 0.0) {
    absl::StatusOr<double> k = stats::ExcessKurtosis(view.u_alice());
    if (!k.ok()) return k.status();
    reference = *k;
  }
  if (*cum == 0.0 || reference == 0.0) {
    return CoinFlip(attack_seed, view.exchange(), kind);
  }
  // cum ~ kurtosis * (R_b - R_a): same sign as the kurtosis when Alice is low.
  AttackGuess g;
  g.guess = (*cum > 0) == (reference > 0) ? Guess::kAliceLow : Guess::kAliceHigh;
  absl::StatusOr<double> var_u = stats::Variance(view.u_alice());
  absl::StatusOr<double> var_i = stats::Variance(view.i_alice());
  if (var_u.ok() && var_i.ok() && *var_u > 0 && *var_i > 0) {
    const double normalized = *cum / (std::pow(*var_u, 1.5) * std::sqrt(*var_i));
    const double z =
        normalized / stats::KurtosisStandardError(view.n_eff());
    g.confidence = stats::NormalCdf(std::abs(z));
  } else {
    g.confidence = 0.5;
  }
  return g;
}

absl::Status InjectionPlan::Validate() const {
  if (!std::isfinite(gamma) || gamma < 0) {
    return absl::InvalidArgumentError("injection gamma must be >= 0");
  }
  if (!(fraction >= 0 && fraction <= 1)) {
    return absl::InvalidArgumentError("injection fraction must lie in [0, 1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<double>> MakeInjectionProbe(
    const InjectionPlan& plan, const PublicParameters& params) {
  if (absl::Status s = plan.Validate(); !s.ok()) return s;
  if (absl::Status s = params.sampling.Validate(); !s.ok()) return s;
  if (plan.gamma == 0.0) return std::vector<double>();
  absl::StatusOr<defense::MixHypotheses> h = Hypotheses(params);
  if (!h.ok()) return h.status();
  const double rms = plan.gamma * std::sqrt(MixCurrentVariance(*h));
  const int n = params.sampling.SampleCount();
  const int k_max = params.sampling.BandBins();
  const int bin = std::clamp(
      static_cast<int>(std::lround(0.5 * params.sampling.bandwidth_hz * n /
                                   params.sampling.sample_rate_hz)),
      1, k_max);
  std::vector<double> probe(n);
  const double amplitude = std::numbers::sqrt2 * rms;
  for (int t = 0; t < n; ++t) {
    probe[t] = amplitude * std::sin(2.0 * std::numbers::pi * bin * t / n);
  }
  return probe;
}

bool IsInjectedExchange(uint64_t attack_seed, int64_t exchange,
                        double fraction) {
  if (fraction >= 1.0) return true;
  if (fraction <= 0.0) return false;
  Engine engine = MakeEngine(attack_seed, static_cast<uint64_t>(exchange),
                             Party::kEve, StreamRole::kInjectionSchedule);
  return UniformUnit(engine) < fraction;
}

absl::StatusOr<AttackGuess> ActiveInjectionAttack(
    const EveView& view, std::span<const double> probe, uint64_t attack_seed) {
  if (probe.empty()) return AttackGuess{};
  if (probe.size() != view.i_alice().size()) {
    return absl::InvalidArgumentError("probe length differs from the trace");
  }
  const PublicParameters& p = view.params();
  absl::StatusOr<defense::MixHypotheses> h = Hypotheses(p);
  if (!h.ok()) return h.status();
  double num = 0.0, den = 0.0;
  for (size_t t = 0; t < probe.size(); ++t) {
    num += view.i_alice()[t] * probe[t];
    den += probe[t] * probe[t];
  }
  if (!(den > 0)) return AttackGuess{};
  const double gain = num / den;
  const double bob_side = (1.0 - p.tap_fraction) * p.wire_ohm;
  const double total = p.pair.low_ohm + p.pair.high_ohm + p.wire_ohm;
  // Alice low means Bob holds R_H.
  const double gain_low = (bob_side + p.pair.high_ohm) / total;
  const double gain_high = (bob_side + p.pair.low_ohm) / total;
  // Loop noise projected on one in-band bin.
  const double n = static_cast<double>(probe.size());
  const double se = std::sqrt(MixCurrentVariance(*h) * n /
                              (2.0 * p.sampling.BandBins() * den));
  const double llr =
      defense::GaussianLogLikelihoodRatio(gain, gain_low, gain_high, se);
  return FromLlr(llr, attack_seed, view.exchange(), AttackKind::kInjection);
}

absl::StatusOr<Tally> MakeTally(int64_t evaluated, int64_t correct,
                                int64_t abstained, double ci_level) {
  if (evaluated < 0 || correct < 0 || correct > evaluated || abstained < 0) {
    return absl::InvalidArgumentError("inconsistent tally counts");
  }
  Tally t;
  t.evaluated = evaluated;
  t.correct = correct;
  t.abstained = abstained;
  if (evaluated > 0) {
    t.accuracy = static_cast<double>(correct) / static_cast<double>(evaluated);
    absl::StatusOr<stats::Interval> ci =
        stats::WilsonInterval(correct, evaluated, ci_level);
    if (!ci.ok()) return ci.status();
    t.ci = *ci;
  }
  t.leak_bits = stats::BinarySymmetricCapacity(t.accuracy);
  return t;
}

absl::StatusOr<AttackReport> ScoreAttack(AttackKind kind,
                                         std::vector<AttackGuess> guesses,
                                         std::span<const ExchangeRecord> records,
                                         double ci_level) {
  int64_t mix_eval = 0, mix_correct = 0, mix_abstain = 0;
  int64_t kept_eval = 0, kept_correct = 0, kept_abstain = 0;
  for (const ExchangeRecord& r : records) {
    if (r.index < 0 || r.index >= static_cast<int64_t>(guesses.size())) {
      return absl::OutOfRangeError(
          absl::StrCat("no guess for exchange ", r.index));
    }
    if (r.classification != Level::kMix) continue;
    const AttackGuess& g = guesses[r.index];
    const bool kept = r.discard_reason == DiscardReason::kKept;
    if (g.guess == Guess::kAbstain) {
      ++mix_abstain;
      kept_abstain += kept;
      continue;
    }
    const bool right =
        (g.guess == Guess::kAliceLow) == (r.alice_choice == Choice::kLow);
    ++mix_eval;
    mix_correct += right;
    kept_eval += kept;
    kept_correct += kept && right;
  }
  AttackReport report;
  report.kind = kind;
  report.name = std::string(AttackName(kind));
  report.ci_level = ci_level;
  absl::StatusOr<Tally> mix =
      MakeTally(mix_eval, mix_correct, mix_abstain, ci_level);
  if (!mix.ok()) return mix.status();
  absl::StatusOr<Tally> kept =
      MakeTally(kept_eval, kept_correct, kept_abstain, ci_level);
  if (!kept.ok()) return kept.status();
  report.mix = *mix;
  report.kept = *kept;
  report.guesses = std::move(guesses);
  return report;
}

absl::StatusOr<AttackSuite> AttackSuite::Create(const PublicParameters& params,
                                                const AttackSelection& selection,
                                                int64_t n_exchanges) {
  if (n_exchanges < 0) {
    return absl::InvalidArgumentError("n_exchanges must be >= 0");
  }
  if (absl::Status s = selection.injection.Validate(); !s.ok()) return s;
  AttackSuite suite;
  suite.params_ = params;
  suite.selection_ = selection;
  if (selection.Enabled(AttackKind::kInjection)) {
    absl::StatusOr<std::vector<double>> probe =
        MakeInjectionProbe(selection.injection, params);
    if (!probe.ok()) return probe.status();
    suite.probe_ = std::move(*probe);
  }
  for (auto& g : suite.guesses_) g.assign(n_exchanges, AttackGuess{});
  suite.cross_power_.assign(n_exchanges, 0.0);
  suite.errors_.assign(n_exchanges, absl::OkStatus());
  return suite;
}

InjectionSource AttackSuite::Injector() const {
  return [this](int64_t exchange) -> std::optional<std::vector<double>> {
    if (probe_.empty() ||
        !IsInjectedExchange(selection_.seed, exchange,
                            selection_.injection.fraction)) {
      return std::nullopt;
    }
    return probe_;
  };
}

SlotTap AttackSuite::Tap() {
  return [this](const SlotView& slot) {
    const int64_t e = slot.exchange;
    if (e < 0 || e >= static_cast<int64_t>(errors_.size())) return;
    absl::StatusOr<EveView> view = EveView::Create(e, *slot.trace, params_);
    if (!view.ok()) {
      errors_[e] = view.status();
      return;
    }
    absl::StatusOr<double> cross =
        stats::CrossPower(view->u_alice(), view->i_alice());
    if (cross.ok()) cross_power_[e] = *cross;

    absl::StatusOr<Level> level = ClassifyFromTap(*view);
    if (!level.ok()) {
      errors_[e] = level.status();
      return;
    }
    if (*level != Level::kMix) return;  // every attack abstains
    const uint64_t seed = selection_.seed;
    for (int k = 0; k < kAttackKinds; ++k) {
      const AttackKind kind = static_cast<AttackKind>(k);
      if (!selection_.Enabled(kind)) continue;
      absl::StatusOr<AttackGuess> g;
      switch (kind) {
        case AttackKind::kPassiveLevel:
          g = PassiveLevelAttack(*view, seed);
          break;
        case AttackKind::kScheuerYariv:
          g = ScheuerYarivAttack(*view, seed);
          break;
        case AttackKind::kHao:
          g = HaoTemperatureAttack(*view, seed);
          break;
        case AttackKind::kCumulant:
          g = HigherOrderCumulantAttack(*view, seed);
          break;
        case AttackKind::kInjection: {
          const bool injected = !probe_.empty() &&
                                IsInjectedExchange(seed, e,
                                                   selection_.injection.fraction);
          g = ActiveInjectionAttack(
              *view, injected ? std::span<const double>(probe_)
                              : std::span<const double>(),
              seed);
          break;
        }
      }
      if (!g.ok()) {
        errors_[e] = g.status();
        return;
      }
      guesses_[k][e] = *g;
    }
  };
}

absl::StatusOr<std::vector<AttackReport>> AttackSuite::Finish(
    std::span<const ExchangeRecord> records, double ci_level) const {
  for (size_t e = 0; e < errors_.size(); ++e) {
    if (!errors_[e].ok()) {
      return absl::Status(errors_[e].code(),
                          absl::StrCat("exchange ", e, ": ",
                                       errors_[e].message()));
    }
  }
  std::vector<AttackReport> reports;
  for (int k = 0; k < kAttackKinds; ++k) {
    const AttackKind kind = static_cast<AttackKind>(k);
    if (!selection_.Enabled(kind)) continue;
    absl::StatusOr<AttackReport> r =
        ScoreAttack(kind, guesses_[k], records, ci_level);
    if (!r.ok()) return r.status();
    reports.push_back(std::move(*r));
  }
  return reports;
}

double AttackSuite::PooledCrossPower() const {
  return stats::Mean(cross_power_);
}

double AttackSuite::PooledCrossPowerStandardError() const {
  if (cross_power_.size() < 2) return 0.0;
  absl::StatusOr<double> var = stats::Variance(cross_power_);
  return var.ok() ? std::sqrt(*var / cross_power_.size()) : 0.0;
}

absl::Status WriteGuessCsv(std::span<const AttackReport> reports,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "exchange,attack,guess,confidence\n";
  for (const AttackReport& r : reports) {
    for (size_t e = 0; e < r.guesses.size(); ++e) {
      const AttackGuess& g = r.guesses[e];
      out << absl::StrFormat("%d,%s,%s,%.6f\n", e, r.name, std::string(GuessName(g.guess)),
                             g.confidence);
    }
  }
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

}  // namespace kljn::eve

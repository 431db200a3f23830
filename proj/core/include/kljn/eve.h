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

#ifndef KLJN_EVE_H_
#define KLJN_EVE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/estimators.h"
#include "kljn/loop_sim.h"
#include "kljn/noisegen.h"
#include "kljn/protocol.h"

namespace kljn::eve {

// Everything Eve is granted: all public parameters and non-idealities.
struct PublicParameters {
  SamplingSpec sampling;
  ResistorPair pair;
  Temperatures temperatures{1.0e15, 1.0e15};
  double wire_ohm = 0.0;
  double tap_fraction = 0.5;
  Distribution distribution = Distribution::kGaussian;

  static PublicParameters FromSession(const SessionConfig& config);
};

// Eve's legal view of one exchange: the wire series at her taps, the public
// messages about it and the public parameters. Holds no party state.
class EveView {
 public:
  static absl::StatusOr<EveView> Create(int64_t exchange, const Trace& trace,
                                        const PublicParameters& params,
                                        std::span<const PublicMessage> log = {});

  int64_t exchange() const { return exchange_; }
  std::span<const double> u_alice() const { return trace_->u_alice; }
  std::span<const double> u_bob() const { return trace_->u_bob; }
  std::span<const double> u_mid() const { return trace_->u_mid; }
  std::span<const double> i_alice() const { return trace_->i_alice; }
  std::span<const double> i_bob() const { return trace_->i_bob; }
  std::span<const PublicMessage> public_log() const { return log_; }
  const PublicParameters& params() const { return *params_; }
  // 2 B tau, the count every standard error is computed against.
  double n_eff() const { return n_eff_; }

 private:
  EveView() = default;
  int64_t exchange_ = 0;
  const Trace* trace_ = nullptr;
  const PublicParameters* params_ = nullptr;
  std::span<const PublicMessage> log_;
  double n_eff_ = 1.0;
};

enum class Guess : uint8_t { kAbstain, kAliceLow, kAliceHigh };
std::string_view GuessName(Guess g);

struct AttackGuess {
  Guess guess = Guess::kAbstain;
  // Probability Eve assigns to the guess being right; 0 when abstaining.
  double confidence = 0.0;
  // log p(data | Alice L) - log p(data | Alice H); 0 for coin flips.
  double llr = 0.0;
  bool coin_flip = false;
};

enum class AttackKind : uint8_t {
  kPassiveLevel = 0,
  kScheuerYariv,
  kHao,
  kCumulant,
  kInjection,
};
inline constexpr int kAttackKinds = 5;
std::string_view AttackName(AttackKind kind);
absl::StatusOr<AttackKind> ParseAttack(std::string_view name);

// Eve's own level classification from the midpoint voltage variance.
absl::StatusOr<Level> ClassifyFromTap(const EveView& view);

// Each attack assumes an exchange Eve has already classified as MIX (the
// AttackSuite makes every attack abstain otherwise) and is a deterministic
// function of (view, attack_seed).

// Gaussian likelihood ratio over (Var u_A, Var u_B, Var i, <u_A i>). In the
// ideal loop both hypotheses predict identical moments and the guess is a
// seeded fair coin.
absl::StatusOr<AttackGuess> PassiveLevelAttack(const EveView& view,
                                               uint64_t attack_seed);

// Sign of Var(u_A) - Var(u_B): the end next to the larger resistor is
// noisier once the wire drops voltage. Coin flip when the wire is ideal.
absl::StatusOr<AttackGuess> ScheuerYarivAttack(const EveView& view,
                                               uint64_t attack_seed);

// Loop-current variance against its two predictions under unequal
// temperatures, plus the midpoint cross power when the temperature gap is
// large. Coin flip when T_a = T_b.
absl::StatusOr<AttackGuess> HaoTemperatureAttack(const EveView& view,
                                                 uint64_t attack_seed);

// Sign of cum(u_A, u_A, u_A, i) relative to the generators' kurtosis sign.
// Abstains below 100 samples.
absl::StatusOr<AttackGuess> HigherOrderCumulantAttack(const EveView& view,
                                                      uint64_t attack_seed);

struct InjectionPlan {
  // Probe RMS as a fraction of the nominal MIX loop-current RMS. Zero is the
  // null attack.
  double gamma = 0.0;
  // Fraction of exchanges that carry the probe.
  double fraction = 1.0;

  absl::Status Validate() const;
};

// Sinusoidal probe at the in-band bin nearest B / 2; empty when gamma = 0.
absl::StatusOr<std::vector<double>> MakeInjectionProbe(
    const InjectionPlan& plan, const PublicParameters& params);

// Seeded per-exchange injection schedule.
bool IsInjectedExchange(uint64_t attack_seed, int64_t exchange,
                        double fraction);

// Regresses Alice's end current on the probe; the gain (R_2 + R_b) / R_tot
// depends on which end holds R_H. Abstains when no probe was injected.
absl::StatusOr<AttackGuess> ActiveInjectionAttack(
    const EveView& view, std::span<const double> probe, uint64_t attack_seed);

// Accuracy of one attack against the true choices.
struct Tally {
  int64_t evaluated = 0;
  int64_t correct = 0;
  int64_t abstained = 0;
  double accuracy = 0.5;
  stats::Interval ci{0.0, 1.0};
  double leak_bits = 0.0;  // 1 - H2(accuracy), per evaluated exchange
};

struct AttackReport {
  AttackKind kind = AttackKind::kPassiveLevel;
  std::string name;
  double ci_level = 0.95;
  // Exchanges the parties classified MIX.
  Tally mix;
  // Exchanges that ended up in the key.
  Tally kept;
  // Indexed by exchange.
  std::vector<AttackGuess> guesses;
};

// Scores `guesses[e]` against records[e].alice_choice on MIX records.
absl::StatusOr<AttackReport> ScoreAttack(AttackKind kind,
                                         std::vector<AttackGuess> guesses,
                                         std::span<const ExchangeRecord> records,
                                         double ci_level = 0.95);

absl::StatusOr<Tally> MakeTally(int64_t evaluated, int64_t correct,
                                int64_t abstained, double ci_level);

struct AttackSelection {
  std::array<bool, kAttackKinds> enabled{true, true, true, true, false};
  InjectionPlan injection;
  uint64_t seed = 0x5eed;

  bool Enabled(AttackKind k) const { return enabled[static_cast<int>(k)]; }
};

// Runs the selected attacks live on every exchange of a key-exchange run.
// Guesses are written to per-exchange slots, so any worker count yields the
// same result.
class AttackSuite {
 public:
  static absl::StatusOr<AttackSuite> Create(const PublicParameters& params,
                                            const AttackSelection& selection,
                                            int64_t n_exchanges);

  // Hooks for RunOptions. Both reference this object, which must outlive
  // the run.
  SlotTap Tap();
  InjectionSource Injector() const;

  // Reports in AttackKind order for the enabled attacks.
  absl::StatusOr<std::vector<AttackReport>> Finish(
      std::span<const ExchangeRecord> records, double ci_level = 0.95) const;

  // Pooled cross-power <u_A i> over all exchanges, with its SE.
  double PooledCrossPower() const;
  double PooledCrossPowerStandardError() const;
  const std::vector<double>& probe() const { return probe_; }

 private:
  AttackSuite() = default;

  PublicParameters params_;
  AttackSelection selection_;
  std::vector<double> probe_;
  std::array<std::vector<AttackGuess>, kAttackKinds> guesses_;
  std::vector<double> cross_power_;
  std::vector<absl::Status> errors_;
};

// Per-exchange guesses, one row per (exchange, attack):
//   exchange,attack,guess,confidence
absl::Status WriteGuessCsv(std::span<const AttackReport> reports,
                           const std::string& path);

}  // namespace kljn::eve

#endif  // KLJN_EVE_H_

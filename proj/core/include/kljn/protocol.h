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

#ifndef KLJN_PROTOCOL_H_
#define KLJN_PROTOCOL_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/defense.h"
#include "kljn/loop_sim.h"
#include "kljn/noisegen.h"
#include "kljn/random.h"
#include "kljn/summary.h"

namespace kljn {

enum class Choice : uint8_t { kLow, kHigh };
enum class Level : uint8_t { kLL, kMix, kHH };
enum class End : uint8_t { kAlice, kBob, kMid };

std::string_view ChoiceName(Choice c);
std::string_view LevelName(Level l);

// The two public resistor values.
struct ResistorPair {
  double low_ohm = 1.0e4;
  double high_ohm = 1.0e5;

  absl::Status Validate(double min_ratio = 2.0) const;
  double Resistance(Choice c) const {
    return c == Choice::kLow ? low_ohm : high_ohm;
  }
};

struct Temperatures {
  double alice_k = 0.0;
  double bob_k = 0.0;
};

// Fair coin from the party's stream.
Choice ChooseResistor(Engine& party_stream);
Choice ChooseResistor(uint64_t master_seed, uint64_t exchange, Party party);

// Which loop statistic a classifier reads.
enum class Statistic : uint8_t { kVoltageVariance, kCurrentVariance };

// Maps a measured variance to LL / MIX / HH. The analytic level of every
// resistor arrangement (LL, LH, HL, HH) is computed at the chosen end; the
// decision thresholds sit at geometric means of adjacent sorted levels and
// the measured value takes the band it falls in.
class LevelClassifier {
 public:
  static absl::StatusOr<LevelClassifier> Create(
      const ResistorPair& pair, const Temperatures& temperatures,
      double bandwidth_hz, double wire_ohm, End end = End::kAlice,
      Statistic statistic = Statistic::kVoltageVariance,
      double tap_fraction = 0.5);

  absl::StatusOr<Level> Classify(double measured_variance) const;

  // Analytic level for one arrangement.
  double LevelFor(Choice alice, Choice bob) const;

 private:
  std::array<double, 4> levels_{};         // indexed by 2 * alice + bob
  std::array<double, 4> sorted_levels_{};
  std::array<Level, 4> sorted_classes_{};
  std::array<double, 3> thresholds_{};
};

absl::StatusOr<Level> ClassifyLevel(double measured_var_u,
                                    const ResistorPair& pair,
                                    const Temperatures& temperatures,
                                    double bandwidth_hz, double wire_ohm,
                                    End end = End::kAlice);
absl::StatusOr<Level> ClassifyLevel(double measured_var_u,
                                    const ResistorPair& pair,
                                    double temperature_k, double bandwidth_hz,
                                    double wire_ohm);

// LL and HH yield no bit. In the MIX state each party infers the peer's
// choice from its own; the public convention is bit = 1 iff Alice holds R_L.
// A classification that contradicts the party's own choice (own L but HH,
// own H but LL) is an error and voids the exchange.
absl::StatusOr<std::optional<int>> DeriveBit(Party party, Choice own,
                                             Level level);

enum class DiscardReason : uint8_t { kKept, kNotMixed, kAlarm, kRisk, kAborted };
std::string_view DiscardReasonName(DiscardReason r);

struct ExchangeRecord {
  int64_t index = 0;
  int64_t slot = 0;
  Choice alice_choice = Choice::kLow;
  Choice bob_choice = Choice::kLow;
  bool injected = false;
  double measured_var_u = 0.0;
  double measured_var_i = 0.0;
  Level classification = Level::kLL;
  std::optional<int> bit_value;
  double risk_score = 0.0;
  bool discarded = true;
  DiscardReason discard_reason = DiscardReason::kNotMixed;
  std::vector<defense::Alarm> alarms;

  // MIX with no alarm: a bit both parties would accept before risk discard.
  bool IsBitCandidate() const {
    return classification == Level::kMix && alarms.empty() &&
           discard_reason != DiscardReason::kAborted;
  }
};

// Public-channel messages. None of these types can carry a resistor choice
// or a key bit.
struct SketchSeedAnnouncement {
  int64_t exchange = 0;
  uint64_t seed = 0;
};
struct SummaryAnnouncement {
  int64_t exchange = 0;
  Summary summary;
};
struct SecureAnnouncement {
  int64_t exchange = 0;
  Party party = Party::kAlice;
  bool secure = false;
};
struct RiskAnnouncement {
  int64_t exchange = 0;
  Party party = Party::kAlice;
  double score = 0.0;
};
struct DiscardNotice {
  int64_t exchange = 0;
  DiscardReason reason = DiscardReason::kNotMixed;
};
struct AlarmNotice {
  int64_t slot = 0;
  int64_t exchange = -1;  // -1 for probe slots
  defense::Alarm alarm;
};
struct ProbeNotice {
  int64_t slot = 0;
  double estimate_ohm = 0.0;
  bool alarm = false;
};
struct AbortNotice {
  int64_t slot = 0;
  std::string reason;
};

using PublicMessage =
    std::variant<SketchSeedAnnouncement, SummaryAnnouncement,
                 SecureAnnouncement, RiskAnnouncement, DiscardNotice,
                 AlarmNotice, ProbeNotice, AbortNotice>;
using PublicLog = std::vector<PublicMessage>;

struct SessionConfig {
  SamplingSpec sampling;
  ResistorPair pair;
  double min_ratio = 2.0;
  Temperatures temperatures{1.0e15, 1.0e15};
  // Registered (publicly known) wire resistance.
  double wire_ohm = 0.0;
  // Series resistance an adversary splices into the wire; the loop sees
  // wire_ohm + extra_series_ohm.
  double extra_series_ohm = 0.0;
  double tap_fraction = 0.5;
  Distribution distribution = Distribution::kGaussian;
  double measurement_noise_v = 0.0;
  double measurement_noise_a = 0.0;
  uint64_t master_seed = 1;

  absl::Status Validate() const;
  double ActualWireOhm() const { return wire_ohm + extra_series_ohm; }
  // 2 B tau as a double.
  double EffectiveSamples() const;
};

struct DefenseConfig {
  bool enabled = true;
  defense::ComparisonPolicy comparison;
  defense::RiskPolicy risk;
  double probe_fraction = 0.05;
  defense::ProbeSpec probe;

  absl::Status Validate() const;
};

// Full-scale values derived from the public levels of a session.
absl::StatusOr<SummaryScales> ScalesFor(const SessionConfig& config,
                                        int bits);

// What a tap sees for one exchange: the wire trace and the two published
// summaries. Called from worker threads, possibly out of order.
struct SlotView {
  int64_t exchange = 0;
  int64_t slot = 0;
  const Trace* trace = nullptr;
  const Summary* alice_summary = nullptr;
  const Summary* bob_summary = nullptr;
  uint64_t sketch_seed = 0;
};

using InjectionSource =
    std::function<std::optional<std::vector<double>>(int64_t exchange)>;
using SlotTap = std::function<void(const SlotView&)>;

struct RunOptions {
  int workers = 1;
  int batch_size = 64;
  // Must be pure and thread-safe.
  InjectionSource injector;
  SlotTap tap;
  // Non-empty: one trace CSV per exchange in this directory.
  std::string trace_dump_dir;
};

struct RunResult {
  std::vector<uint8_t> alice_key;
  std::vector<uint8_t> bob_key;
  std::vector<ExchangeRecord> records;
  PublicLog public_log;
  int64_t slots = 0;
  int64_t probes = 0;
  int64_t probe_alarms = 0;
  bool aborted = false;
  std::string abort_reason;

  bool KeysAgree() const { return alice_key == bob_key; }
  int64_t AlarmedExchanges() const;
};

// Runs `n_exchanges` bit exchanges. Physics and per-party statistics are
// computed in parallel batches; alarm escalation, probing and key assembly
// are applied sequentially in exchange order, so the result does not depend
// on the worker count.
absl::StatusOr<RunResult> RunKeyExchange(int64_t n_exchanges,
                                         const SessionConfig& config,
                                         const DefenseConfig& defense,
                                         const RunOptions& options = {});

}  // namespace kljn

#endif  // KLJN_PROTOCOL_H_

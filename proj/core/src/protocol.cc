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

#include "kljn/protocol.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "kljn/estimators.h"

namespace kljn {

std::string_view ChoiceName(Choice c) { return c == Choice::kLow ? "L" : "H"; }

std::string_view LevelName(Level l) {
  switch (l) {
    case Level::kLL:
      return "LL";
    case Level::kMix:
      return "MIX";
    case Level::kHH:
      return "HH";
  }
  return "?";
}

std::string_view DiscardReasonName(DiscardReason r) {
  switch (r) {
    case DiscardReason::kKept:
      return "kept";
    case DiscardReason::kNotMixed:
      return "not_mixed";
    case DiscardReason::kAlarm:
      return "alarm";
    case DiscardReason::kRisk:
      return "risk";
    case DiscardReason::kAborted:
      return "aborted";
  }
  return "?";
}

absl::Status ResistorPair::Validate(double min_ratio) const {
  if (!std::isfinite(low_ohm) || !std::isfinite(high_ohm) || low_ohm <= 0 ||
      high_ohm <= low_ohm) {
    return absl::InvalidArgumentError("resistor pair needs 0 < R_L < R_H");
  }
  if (high_ohm / low_ohm < min_ratio) {
    return absl::InvalidArgumentError(absl::StrCat(
        "R_H / R_L = ", high_ohm / low_ohm, " is below the floor ", min_ratio));
  }
  return absl::OkStatus();
}

Choice ChooseResistor(Engine& party_stream) {
  return (party_stream() >> 63) ? Choice::kHigh : Choice::kLow;
}

Choice ChooseResistor(uint64_t master_seed, uint64_t exchange, Party party) {
  Engine engine =
      MakeEngine(master_seed, exchange, party, StreamRole::kResistorChoice);
  return ChooseResistor(engine);
}

absl::StatusOr<LevelClassifier> LevelClassifier::Create(
    const ResistorPair& pair, const Temperatures& temperatures,
    double bandwidth_hz, double wire_ohm, End end, Statistic statistic,
    double tap_fraction) {
  if (absl::Status s = pair.Validate(1.0); !s.ok()) return s;
  LevelClassifier c;
  for (Choice a : {Choice::kLow, Choice::kHigh}) {
    for (Choice b : {Choice::kLow, Choice::kHigh}) {
      absl::StatusOr<LoopMoments> m = ExpectedLevels(
          pair.Resistance(a), pair.Resistance(b), temperatures.alice_k,
          temperatures.bob_k, wire_ohm, bandwidth_hz, tap_fraction);
      if (!m.ok()) return m.status();
      double level = m->var_i;
      if (statistic == Statistic::kVoltageVariance) {
        level = end == End::kAlice ? m->var_u_alice
                : end == End::kBob ? m->var_u_bob
                                   : m->var_u_mid;
      }
      if (!(level > 0)) {
        return absl::FailedPreconditionError(
            "analytic levels vanish (zero temperature?)");
      }
      c.levels_[2 * static_cast<int>(a) + static_cast<int>(b)] = level;
    }
  }
  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return c.levels_[x] < c.levels_[y]; });
  constexpr std::array<Level, 4> kClassOf = {Level::kLL, Level::kMix,
                                             Level::kMix, Level::kHH};
  for (int k = 0; k < 4; ++k) {
    c.sorted_levels_[k] = c.levels_[order[k]];
    c.sorted_classes_[k] = kClassOf[order[k]];
  }
  for (int k = 0; k < 3; ++k) {
    c.thresholds_[k] = std::sqrt(c.sorted_levels_[k] * c.sorted_levels_[k + 1]);
  }
  return c;
}

absl::StatusOr<Level> LevelClassifier::Classify(double measured_variance) const {
  if (!(measured_variance > 0) || !std::isfinite(measured_variance)) {
    return absl::InvalidArgumentError(
        "measured variance must be finite and > 0");
  }
  int band = 0;
  while (band < 3 && measured_variance > thresholds_[band]) ++band;
  return sorted_classes_[band];
}

double LevelClassifier::LevelFor(Choice alice, Choice bob) const {
  return levels_[2 * static_cast<int>(alice) + static_cast<int>(bob)];
}

absl::StatusOr<Level> ClassifyLevel(double measured_var_u,
                                    const ResistorPair& pair,
                                    const Temperatures& temperatures,
                                    double bandwidth_hz, double wire_ohm,
                                    End end) {
  absl::StatusOr<LevelClassifier> classifier = LevelClassifier::Create(
      pair, temperatures, bandwidth_hz, wire_ohm, end);
  if (!classifier.ok()) return classifier.status();
  return classifier->Classify(measured_var_u);
}

absl::StatusOr<Level> ClassifyLevel(double measured_var_u,
                                    const ResistorPair& pair,
                                    double temperature_k, double bandwidth_hz,
                                    double wire_ohm) {
  return ClassifyLevel(measured_var_u, pair, {temperature_k, temperature_k},
                       bandwidth_hz, wire_ohm);
}

absl::StatusOr<std::optional<int>> DeriveBit(Party party, Choice own,
                                             Level level) {
  if (party != Party::kAlice && party != Party::kBob) {
    return absl::InvalidArgumentError("only Alice and Bob derive bits");
  }
  if ((level == Level::kLL && own == Choice::kHigh) ||
      (level == Level::kHH && own == Choice::kLow)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "own choice ", std::string(ChoiceName(own)),
        " contradicts classification ", std::string(LevelName(level))));
  }
  if (level != Level::kMix) return std::optional<int>();
  const bool alice_low =
      party == Party::kAlice ? own == Choice::kLow : own == Choice::kHigh;
  return std::optional<int>(alice_low ? 1 : 0);
}

absl::Status SessionConfig::Validate() const {
  if (absl::Status s = sampling.Validate(); !s.ok()) return s;
  if (absl::Status s = pair.Validate(min_ratio); !s.ok()) return s;
  if (!(min_ratio >= 1)) {
    return absl::InvalidArgumentError("min_ratio must be >= 1");
  }
  LoopConfig loop{.alice_ohm = pair.low_ohm,
                  .bob_ohm = pair.high_ohm,
                  .alice_k = temperatures.alice_k,
                  .bob_k = temperatures.bob_k,
                  .wire_ohm = ActualWireOhm(),
                  .tap_fraction = tap_fraction,
                  .distribution = distribution,
                  .injection_a = {},
                  .measurement_noise_v = measurement_noise_v,
                  .measurement_noise_a = measurement_noise_a};
  if (absl::Status s = loop.Validate(); !s.ok()) return s;
  if (!(wire_ohm >= 0) || !(extra_series_ohm >= 0)) {
    return absl::InvalidArgumentError("wire resistances must be >= 0");
  }
  return absl::OkStatus();
}

double SessionConfig::EffectiveSamples() const {
  absl::StatusOr<int64_t> n = IndependentSampleBudget(sampling);
  return n.ok() ? static_cast<double>(std::max<int64_t>(*n, 1)) : 1.0;
}

absl::Status DefenseConfig::Validate() const {
  if (!enabled) return absl::OkStatus();
  if (absl::Status s = comparison.Validate(); !s.ok()) return s;
  if (absl::Status s = risk.Validate(); !s.ok()) return s;
  if (!(probe_fraction >= 0 && probe_fraction < 1)) {
    return absl::InvalidArgumentError("probe_fraction must lie in [0, 1)");
  }
  return probe.Validate();
}

absl::StatusOr<SummaryScales> ScalesFor(const SessionConfig& config,
                                        int bits) {
  double max_var_u = 0.0, max_var_i = 0.0;
  for (Choice a : {Choice::kLow, Choice::kHigh}) {
    for (Choice b : {Choice::kLow, Choice::kHigh}) {
      absl::StatusOr<LoopMoments> m = ExpectedLevels(
          config.pair.Resistance(a), config.pair.Resistance(b),
          config.temperatures.alice_k, config.temperatures.bob_k,
          config.wire_ohm, config.sampling.bandwidth_hz, config.tap_fraction);
      if (!m.ok()) return m.status();
      max_var_u = std::max({max_var_u, m->var_u_alice, m->var_u_bob});
      max_var_i = std::max(max_var_i, m->var_i);
    }
  }
  // Zero-temperature sessions still need a usable scale.
  if (!(max_var_u > 0)) max_var_u = 1.0;
  if (!(max_var_i > 0)) max_var_i = 1.0;
  SummaryScales scales;
  scales.bits = bits;
  scales.var_u_full = 4.0 * max_var_u;
  scales.var_i_full = 4.0 * max_var_i;
  scales.sketch_u_full = 6.0 * std::sqrt(max_var_u);
  scales.sketch_i_full = 6.0 * std::sqrt(max_var_i);
  return scales;
}

int64_t RunResult::AlarmedExchanges() const {
  return std::count_if(records.begin(), records.end(),
                       [](const ExchangeRecord& r) { return !r.alarms.empty(); });
}

namespace {

// Per-party results of the pure phase.
struct PartyOutcome {
  PartyMeasurement measurement;
  Summary summary;
  absl::StatusOr<Level> level_u = Level::kLL;
  absl::StatusOr<Level> level_i = Level::kLL;
  defense::RiskContext risk;
};

struct ExchangeOutcome {
  int64_t exchange = 0;
  int64_t slot = 0;
  Choice alice_choice = Choice::kLow;
  Choice bob_choice = Choice::kLow;
  bool injected = false;
  uint64_t sketch_seed = 0;
  PartyOutcome alice;
  PartyOutcome bob;
  std::vector<defense::Alarm> comparison_alarms;
};

// Everything that is a pure function of (session, exchange index).
class ExchangeWorker {
 public:
  static absl::StatusOr<ExchangeWorker> Create(const SessionConfig& config,
                                               const DefenseConfig& defense,
                                               const RunOptions& options) {
    ExchangeWorker w(config, defense, options);
    const Temperatures& temps = config.temperatures;
    const double b = config.sampling.bandwidth_hz;
    const int bits = defense.enabled ? defense.comparison.quant_bits : 12;
    absl::StatusOr<SummaryScales> scales = ScalesFor(config, bits);
    if (!scales.ok()) return scales.status();
    w.scales_ = *scales;
    // Parties classify against the registered wire.
    auto make = [&](End end, Statistic stat) {
      return LevelClassifier::Create(config.pair, temps, b, config.wire_ohm,
                                     end, stat, config.tap_fraction);
    };
    w.alice_u_ = make(End::kAlice, Statistic::kVoltageVariance);
    w.bob_u_ = make(End::kBob, Statistic::kVoltageVariance);
    w.current_ = make(End::kAlice, Statistic::kCurrentVariance);
    absl::StatusOr<defense::MixHypotheses> hyp = defense::ComputeMixHypotheses(
        config.pair.low_ohm, config.pair.high_ohm, temps.alice_k, temps.bob_k,
        config.wire_ohm, b, config.tap_fraction);
    if (!hyp.ok()) return hyp.status();
    w.hypotheses_ = *hyp;
    return w;
  }

  absl::StatusOr<ExchangeOutcome> Run(int64_t exchange, int64_t slot) const {
    const uint64_t master = config_.master_seed;
    ExchangeOutcome out;
    out.exchange = exchange;
    out.slot = slot;
    out.alice_choice = ChooseResistor(master, exchange, Party::kAlice);
    out.bob_choice = ChooseResistor(master, exchange, Party::kBob);

    LoopConfig loop{.alice_ohm = config_.pair.Resistance(out.alice_choice),
                    .bob_ohm = config_.pair.Resistance(out.bob_choice),
                    .alice_k = config_.temperatures.alice_k,
                    .bob_k = config_.temperatures.bob_k,
                    .wire_ohm = config_.ActualWireOhm(),
                    .tap_fraction = config_.tap_fraction,
                    .distribution = config_.distribution,
                    .injection_a = {},
                    .measurement_noise_v = config_.measurement_noise_v,
                    .measurement_noise_a = config_.measurement_noise_a};
    if (options_.injector) {
      std::optional<std::vector<double>> injection = options_.injector(exchange);
      if (injection.has_value()) {
        loop.injection_a = std::move(*injection);
        out.injected = true;
      }
    }
    absl::StatusOr<Trace> trace = SimulateExchange(
        loop, config_.sampling, SeedsForExchange(master, exchange));
    if (!trace.ok()) return trace.status();

    out.sketch_seed = DeriveSeed(master, exchange, Party::kHarness,
                                 StreamRole::kSketch);
    const SketchBasis basis(out.sketch_seed, trace->size());
    const double n_eff = config_.EffectiveSamples();

    auto measure = [&](std::span<const double> u, std::span<const double> i,
                       Party party, const absl::StatusOr<LevelClassifier>& cu,
                       PartyOutcome& po) -> absl::Status {
      absl::StatusOr<PartyMeasurement> m =
          Measure(u, i, config_.sampling, basis);
      if (!m.ok()) return m.status();
      po.measurement = *m;
      po.summary = Quantize(*m, scales_, party);
      po.level_u = cu.ok() ? cu->Classify(m->var_u) : cu.status();
      po.level_i = current_.ok() ? current_->Classify(m->var_i) : current_.status();
      if (defense_.enabled) {
        absl::StatusOr<defense::RiskContext> ctx = defense::AssessExchange(
            u, i, party == Party::kAlice, hypotheses_, config_.wire_ohm, n_eff);
        if (ctx.ok()) po.risk = *ctx;
      }
      return absl::OkStatus();
    };
    if (absl::Status s = measure(trace->u_alice, trace->i_alice, Party::kAlice,
                                 alice_u_, out.alice);
        !s.ok()) {
      return s;
    }
    if (absl::Status s =
            measure(trace->u_bob, trace->i_bob, Party::kBob, bob_u_, out.bob);
        !s.ok()) {
      return s;
    }

    if (defense_.enabled) {
      absl::StatusOr<defense::ComparisonResult> cmp =
          defense::CompareMeasurements(out.alice.summary, out.bob.summary,
                                       scales_, config_.wire_ohm,
                                       defense_.comparison);
      if (!cmp.ok()) return cmp.status();
      out.comparison_alarms = std::move(cmp->alarms);
    }

    if (!options_.trace_dump_dir.empty()) {
      const std::string path = absl::StrFormat(
          "%s/exchange_%06d.csv", options_.trace_dump_dir, exchange);
      if (absl::Status s = WriteTraceCsv(*trace, path); !s.ok()) return s;
    }
    if (options_.tap) {
      SlotView view{.exchange = exchange,
                    .slot = slot,
                    .trace = &*trace,
                    .alice_summary = &out.alice.summary,
                    .bob_summary = &out.bob.summary,
                    .sketch_seed = out.sketch_seed};
      options_.tap(view);
    }
    return out;
  }

  const SummaryScales& scales() const { return scales_; }

 private:
  ExchangeWorker(const SessionConfig& config, const DefenseConfig& defense,
                 const RunOptions& options)
      : config_(config), defense_(defense), options_(options) {}

  const SessionConfig& config_;
  const DefenseConfig& defense_;
  const RunOptions& options_;
  SummaryScales scales_;
  absl::StatusOr<LevelClassifier> alice_u_ = absl::UnknownError("unset");
  absl::StatusOr<LevelClassifier> bob_u_ = absl::UnknownError("unset");
  absl::StatusOr<LevelClassifier> current_ = absl::UnknownError("unset");
  defense::MixHypotheses hypotheses_;
};

// Sequential session state: alarm escalation and key assembly.
class Session {
 public:
  Session(const SessionConfig& config, const DefenseConfig& defense,
          RunResult& result)
      : config_(config), defense_(defense), result_(result) {}

  bool aborted() const { return result_.aborted; }

  void Probe(int64_t slot) {
    ++result_.probes;
    absl::StatusOr<defense::ProbeResult> probe = defense::IntegrityProbe(
        defense_.probe, config_.sampling, defense::SlotKind::kIdle,
        config_.wire_ohm, config_.ActualWireOhm(),
        DeriveSeed(config_.master_seed, slot, Party::kHarness,
                   StreamRole::kProbeNoise));
    const bool alarm = !probe.ok() || probe->alarm;
    result_.public_log.push_back(
        ProbeNotice{slot, probe.ok() ? probe->estimate_ohm : 0.0, alarm});
    if (alarm) {
      ++result_.probe_alarms;
      result_.public_log.push_back(AlarmNotice{
          slot, -1, {defense::AlarmCode::kIntegrityProbe, "wire_ohm"}});
    }
    Escalate(slot, alarm);
  }

  void Apply(const ExchangeOutcome& out) {
    ExchangeRecord rec;
    rec.index = out.exchange;
    rec.slot = out.slot;
    rec.alice_choice = out.alice_choice;
    rec.bob_choice = out.bob_choice;
    rec.injected = out.injected;
    rec.measured_var_u = out.alice.measurement.var_u;
    rec.measured_var_i = out.alice.measurement.var_i;

    auto& log = result_.public_log;
    log.push_back(SketchSeedAnnouncement{out.exchange, out.sketch_seed});
    if (defense_.enabled) {
      log.push_back(SummaryAnnouncement{out.exchange, out.alice.summary});
      log.push_back(SummaryAnnouncement{out.exchange, out.bob.summary});
    }

    std::vector<defense::Alarm>& alarms = rec.alarms;
    alarms = out.comparison_alarms;
    const bool levels_ok = out.alice.level_u.ok() && out.bob.level_u.ok();
    if (!levels_ok) {
      alarms.push_back({defense::AlarmCode::kMeasurementFailure, "var_u"});
    }
    const Level alice_level = out.alice.level_u.ok() ? *out.alice.level_u : Level::kLL;
    const Level bob_level = out.bob.level_u.ok() ? *out.bob.level_u : Level::kLL;
    rec.classification = alice_level;
    if (defense_.enabled && levels_ok) {
      for (const PartyOutcome* p : {&out.alice, &out.bob}) {
        if (!p->level_i.ok() || *p->level_i != *p->level_u) {
          alarms.push_back(
              {defense::AlarmCode::kLevelStatisticsDisagree, "var_i"});
          break;
        }
      }
    }
    if (levels_ok && alice_level != bob_level) {
      alarms.push_back({defense::AlarmCode::kClassificationDisagree, "level"});
    }
    std::optional<int> alice_bit, bob_bit;
    if (levels_ok) {
      absl::StatusOr<std::optional<int>> a =
          DeriveBit(Party::kAlice, out.alice_choice, alice_level);
      absl::StatusOr<std::optional<int>> b =
          DeriveBit(Party::kBob, out.bob_choice, bob_level);
      if (!a.ok() || !b.ok()) {
        alarms.push_back({defense::AlarmCode::kChoiceInconsistent, "level"});
      } else {
        alice_bit = *a;
        bob_bit = *b;
      }
    }

    log.push_back(SecureAnnouncement{out.exchange, Party::kAlice,
                                     levels_ok && alice_level == Level::kMix});
    log.push_back(SecureAnnouncement{out.exchange, Party::kBob,
                                     levels_ok && bob_level == Level::kMix});
    for (const defense::Alarm& alarm : alarms) {
      log.push_back(AlarmNotice{out.slot, out.exchange, alarm});
    }

    bool risky = false;
    if (defense_.enabled) {
      double score = 0.0;
      for (const auto& [party, po] :
           {std::pair{Party::kAlice, &out.alice}, std::pair{Party::kBob, &out.bob}}) {
        defense::RiskContext ctx = po->risk;
        ctx.alarmed = !alarms.empty();
        const defense::RiskAssessment a = defense::RiskScore(ctx, defense_.risk);
        log.push_back(RiskAnnouncement{out.exchange, party, a.score});
        score = std::max(score, a.score);
        risky = risky || a.discard;
      }
      rec.risk_score = score;
    }

    const bool mixed = levels_ok && alice_level == Level::kMix &&
                       bob_level == Level::kMix;
    if (!alarms.empty()) {
      rec.discard_reason = DiscardReason::kAlarm;
    } else if (!mixed) {
      rec.discard_reason = DiscardReason::kNotMixed;
    } else if (risky) {
      rec.discard_reason = DiscardReason::kRisk;
    } else {
      rec.discard_reason = DiscardReason::kKept;
    }
    rec.discarded = rec.discard_reason != DiscardReason::kKept;
    if (!rec.discarded) {
      rec.bit_value = alice_bit;
      result_.alice_key.push_back(static_cast<uint8_t>(alice_bit.value_or(0)));
      result_.bob_key.push_back(static_cast<uint8_t>(bob_bit.value_or(0)));
    } else {
      log.push_back(DiscardNotice{out.exchange, rec.discard_reason});
    }
    const bool alarmed = !alarms.empty();
    result_.records.push_back(std::move(rec));
    Escalate(out.slot, alarmed);
  }

 private:
  void Escalate(int64_t slot, bool alarmed) {
    consecutive_ = alarmed ? consecutive_ + 1 : 0;
    const int limit = defense_.comparison.consecutive_alarms_to_abort;
    if (defense_.enabled && limit > 0 && consecutive_ >= limit) {
      result_.aborted = true;
      result_.abort_reason =
          absl::StrCat(consecutive_, " consecutive alarmed slots");
      result_.public_log.push_back(AbortNotice{slot, result_.abort_reason});
    }
  }

  const SessionConfig& config_;
  const DefenseConfig& defense_;
  RunResult& result_;
  int consecutive_ = 0;
};

}  // namespace

absl::StatusOr<RunResult> RunKeyExchange(int64_t n_exchanges,
                                         const SessionConfig& config,
                                         const DefenseConfig& defense,
                                         const RunOptions& options) {
  if (n_exchanges < 0) {
    return absl::InvalidArgumentError("n_exchanges must be >= 0");
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (absl::Status s = defense.Validate(); !s.ok()) return s;
  if (!options.trace_dump_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.trace_dump_dir, ec);
    if (ec) {
      return absl::UnavailableError(absl::StrCat(
          "cannot create trace directory ", options.trace_dump_dir));
    }
  }

  RunResult result;
  if (n_exchanges == 0) return result;

  absl::StatusOr<ExchangeWorker> worker =
      ExchangeWorker::Create(config, defense, options);
  if (!worker.ok()) return worker.status();
  Session session(config, defense, result);

  const int workers = std::max(1, options.workers);
  const int64_t batch = std::max(1, options.batch_size);
  const double probe_fraction = defense.enabled ? defense.probe_fraction : 0.0;

  int64_t next_exchange = 0;
  int64_t next_slot = 0;
  while (next_exchange < n_exchanges && !session.aborted()) {
    // Lay out the next batch of slots: probes interleaved with exchanges.
    struct Slot {
      int64_t slot;
      int64_t exchange;  // -1 for a probe
    };
    std::vector<Slot> slots;
    std::vector<int64_t> exchange_slots;
    while (static_cast<int64_t>(exchange_slots.size()) < batch &&
           next_exchange < n_exchanges) {
      const int64_t slot = next_slot++;
      if (defense::IsProbeSlot(config.master_seed, slot, probe_fraction)) {
        slots.push_back({slot, -1});
      } else {
        slots.push_back({slot, next_exchange});
        exchange_slots.push_back(slot);
        ++next_exchange;
      }
    }
    const int64_t first = next_exchange - static_cast<int64_t>(exchange_slots.size());
    std::vector<absl::StatusOr<ExchangeOutcome>> outcomes(
        exchange_slots.size(), absl::UnknownError("not run"));
    auto run_range = [&](int w) {
      for (size_t k = w; k < exchange_slots.size(); k += workers) {
        outcomes[k] = worker->Run(first + static_cast<int64_t>(k), exchange_slots[k]);
      }
    };
    if (workers == 1) {
      run_range(0);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w) threads.emplace_back(run_range, w);
      for (std::thread& t : threads) t.join();
    }

    size_t k = 0;
    for (const Slot& s : slots) {
      if (session.aborted()) break;
      ++result.slots;
      if (s.exchange < 0) {
        session.Probe(s.slot);
        continue;
      }
      const absl::StatusOr<ExchangeOutcome>& out = outcomes[k++];
      if (!out.ok()) return out.status();
      session.Apply(*out);
    }
  }
  return result;
}

}  // namespace kljn

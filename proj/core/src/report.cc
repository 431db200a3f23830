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

#include "kljn/report.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "config_json.h"
#include "json.hpp"
#include "kljn/version.h"

namespace kljn::harness {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string PartyName(Party p) {
  switch (p) {
    case Party::kAlice:
      return "alice";
    case Party::kBob:
      return "bob";
    case Party::kEve:
      return "eve";
    case Party::kHarness:
      return "harness";
  }
  return "?";
}

json AlarmJson(const defense::Alarm& a) {
  return {{"code", std::string(defense::AlarmCodeName(a.code))},
          {"field", a.field}};
}

template <size_t N>
json Codes(const std::array<int32_t, N>& codes) {
  return json(std::vector<int32_t>(codes.begin(), codes.end()));
}

json SummaryJson(const Summary& s) {
  return {{"party", PartyName(s.party)},       {"bits", s.bits},
          {"var_u", s.var_u},                  {"var_i", s.var_i},
          {"spectrum_u", Codes(s.spectrum_u)}, {"spectrum_i", Codes(s.spectrum_i)},
          {"sketch_u", Codes(s.sketch_u)},     {"sketch_i", Codes(s.sketch_i)}};
}

json MessageJson(const PublicMessage& message) {
  return std::visit(
      Overloaded{
          [](const SketchSeedAnnouncement& m) -> json {
            return {{"type", "sketch_seed"},
                    {"exchange", m.exchange},
                    {"seed", m.seed}};
          },
          [](const SummaryAnnouncement& m) -> json {
            return {{"type", "summary"},
                    {"exchange", m.exchange},
                    {"summary", SummaryJson(m.summary)}};
          },
          [](const SecureAnnouncement& m) -> json {
            return {{"type", "secure"},
                    {"exchange", m.exchange},
                    {"party", PartyName(m.party)},
                    {"secure", m.secure}};
          },
          [](const RiskAnnouncement& m) -> json {
            return {{"type", "risk"},
                    {"exchange", m.exchange},
                    {"party", PartyName(m.party)},
                    {"score", m.score}};
          },
          [](const DiscardNotice& m) -> json {
            return {{"type", "discard"},
                    {"exchange", m.exchange},
                    {"reason", std::string(DiscardReasonName(m.reason))}};
          },
          [](const AlarmNotice& m) -> json {
            return {{"type", "alarm"},
                    {"slot", m.slot},
                    {"exchange", m.exchange},
                    {"alarm", AlarmJson(m.alarm)}};
          },
          [](const ProbeNotice& m) -> json {
            return {{"type", "probe"},
                    {"slot", m.slot},
                    {"estimate_ohm", m.estimate_ohm},
                    {"alarm", m.alarm}};
          },
          [](const AbortNotice& m) -> json {
            return {{"type", "abort"}, {"slot", m.slot}, {"reason", m.reason}};
          },
      },
      message);
}

json RecordJson(const ExchangeRecord& r) {
  json alarms = json::array();
  for (const defense::Alarm& a : r.alarms) alarms.push_back(AlarmJson(a));
  return {{"index", r.index},
          {"slot", r.slot},
          {"alice", std::string(ChoiceName(r.alice_choice))},
          {"bob", std::string(ChoiceName(r.bob_choice))},
          {"injected", r.injected},
          {"var_u", r.measured_var_u},
          {"var_i", r.measured_var_i},
          {"level", std::string(LevelName(r.classification))},
          {"bit", r.bit_value.has_value() ? json(*r.bit_value) : json(nullptr)},
          {"risk", r.risk_score},
          {"discard", std::string(DiscardReasonName(r.discard_reason))},
          {"alarms", alarms}};
}

json TallyJson(const eve::Tally& t) {
  return {{"evaluated", t.evaluated}, {"correct", t.correct},
          {"abstained", t.abstained}, {"accuracy", t.accuracy},
          {"ci_lo", t.ci.lo},         {"ci_hi", t.ci.hi},
          {"leak_bits", t.leak_bits}};
}

json Envelope(std::string_view kind, const RunConfig& config) {
  json j;
  j["code_version"] = kCodeIdentifier;
  j["kind"] = std::string(kind);
  j["config"] = internal::ConfigToJsonValue(config);
  return j;
}

}  // namespace

std::vector<uint8_t> PackBits(std::span<const uint8_t> bits) {
  std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != 0) bytes[k / 8] |= static_cast<uint8_t>(0x80u >> (k % 8));
  }
  return bytes;
}

std::string HexKey(std::span<const uint8_t> bits) {
  std::string hex;
  for (uint8_t byte : PackBits(bits)) absl::StrAppendFormat(&hex, "%02x", byte);
  return hex;
}

std::string ExchangeReportJson(const ExchangeExperiment& e) {
  const RunResult& run = e.run;
  json j = Envelope("exchange", e.config);
  int64_t kept = 0;
  for (const ExchangeRecord& r : run.records) {
    kept += r.discard_reason == DiscardReason::kKept;
  }
  j["summary"] = {
      {"exchanges", static_cast<int64_t>(run.records.size())},
      {"slots", run.slots},
      {"mix_exchanges", e.MixExchanges()},
      {"kept_bits", kept},
      {"alarmed_exchanges", run.AlarmedExchanges()},
      {"probes", run.probes},
      {"probe_alarms", run.probe_alarms},
      {"probe_throughput_cost",
       run.slots > 0 ? static_cast<double>(run.probes) / run.slots : 0.0},
      {"aborted", run.aborted},
      {"abort_reason", run.abort_reason},
      {"key_agreement", run.KeysAgree()}};
  j["keys"] = {{"bits", static_cast<int64_t>(run.alice_key.size())},
               {"alice_hex", HexKey(run.alice_key)},
               {"bob_hex", HexKey(run.bob_key)}};
  j["cross_power"] = {{"mean_w", e.cross_power},
                      {"standard_error_w", e.cross_power_se}};
  json attacks = json::array();
  for (const eve::AttackReport& r : e.attacks) {
    attacks.push_back({{"name", r.name},
                       {"ci_level", r.ci_level},
                       {"mix", TallyJson(r.mix)},
                       {"kept", TallyJson(r.kept)}});
  }
  j["attacks"] = attacks;
  json records = json::array();
  for (const ExchangeRecord& r : run.records) records.push_back(RecordJson(r));
  j["records"] = records;
  json log = json::array();
  for (const PublicMessage& m : run.public_log) log.push_back(MessageJson(m));
  j["public_log"] = log;
  return j.dump(1) + "\n";
}

std::string CalibrationReportJson(const CalibrationReport& report,
                                  const RunConfig& config) {
  json j = Envelope("calibration", config);
  json checks = json::array();
  for (const CalibrationCheck& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"expected", c.expected},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"informational", c.informational},
                      {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["passed"] = report.Passed();
  j["first_failure"] = report.FirstFailure();
  return j.dump(2) + "\n";
}

std::string SweepReportJson(std::span<const SweepRow> rows,
                            const RunConfig& config) {
  json j = Envelope("sweep", config);
  json table = json::array();
  for (const SweepRow& r : rows) {
    table.push_back({{"axis", r.axis},
                     {"value", r.value},
                     {"attack", r.attack},
                     {"evaluated", r.evaluated},
                     {"correct", r.correct},
                     {"accuracy", r.accuracy},
                     {"ci_lo", r.ci_lo},
                     {"ci_hi", r.ci_hi},
                     {"leak_bits", r.leak_bits}});
  }
  j["rows"] = table;
  return j.dump(2) + "\n";
}

absl::Status WriteTextFile(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteExchangeArtifacts(const ExchangeExperiment& experiment,
                                    const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", dir));
  if (absl::Status s = WriteTextFile(dir + "/report.json",
                                     ExchangeReportJson(experiment));
      !s.ok()) {
    return s;
  }
  const std::vector<uint8_t> key = PackBits(experiment.run.alice_key);
  if (absl::Status s = WriteTextFile(
          dir + "/key.bin",
          std::string_view(reinterpret_cast<const char*>(key.data()), key.size()));
      !s.ok()) {
    return s;
  }
  if (experiment.config.output.guess_csv) {
    return eve::WriteGuessCsv(experiment.attacks, dir + "/guesses.csv");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> FormatReport(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("kind")) {
    return absl::InvalidArgumentError("not a kljnsim report");
  }
  std::string out;
  try {
    const std::string kind = j.value("kind", "");
    absl::StrAppend(&out, j.value("code_version", "?"), " ", kind, " report\n");
    const json cfg = j.value("config", json::object());
    if (cfg.is_object() && cfg.contains("run")) {
      absl::StrAppendFormat(&out, "seed %s, %s exchanges requested\n",
                            cfg.at("run").at("seed").dump(),
                            cfg.at("run").at("exchanges").dump());
    }
    if (kind == "exchange") {
      const json& s = j.at("summary");
      absl::StrAppendFormat(
          &out,
          "exchanges %s  MIX %s  kept bits %s  alarmed %s\n"
          "probes %s (alarms %s)  aborted %s  keys agree %s\n",
          s.at("exchanges").dump(), s.at("mix_exchanges").dump(), s.at("kept_bits").dump(),
          s.at("alarmed_exchanges").dump(), s.at("probes").dump(),
          s.at("probe_alarms").dump(), s.at("aborted").dump(),
          s.at("key_agreement").dump());
      absl::StrAppendFormat(&out, "cross power %.4g W (SE %.2g)\n",
                            j.at("cross_power").at("mean_w").get<double>(),
                            j.at("cross_power").at("standard_error_w").get<double>());
      absl::StrAppend(&out,
                      "attack          evaluated  accuracy  CI               "
                      "leak bits  kept acc\n");
      for (const json& a : j.at("attacks")) {
        const json& m = a.at("mix");
        absl::StrAppendFormat(
            &out, "%-15s %9d  %8.4f  [%.4f, %.4f]  %9.5f  %8.4f\n",
            a.at("name").get<std::string>(), m.at("evaluated").get<int64_t>(),
            m.at("accuracy").get<double>(), m.at("ci_lo").get<double>(),
            m.at("ci_hi").get<double>(), m.at("leak_bits").get<double>(),
            a.at("kept").at("accuracy").get<double>());
      }
    } else if (kind == "calibration") {
      for (const json& c : j.at("checks")) {
        absl::StrAppendFormat(
            &out, "%-4s %-24s measured %-12.6g expected %-12.6g tol %-8.4g %s\n",
            c.at("pass").get<bool>() ? "ok"
                                  : (c.at("informational").get<bool>() ? "info"
                                                                    : "FAIL"),
            c.at("name").get<std::string>(), c.at("measured").get<double>(),
            c.at("expected").get<double>(), c.at("tolerance").get<double>(),
            c.at("detail").get<std::string>());
      }
    } else if (kind == "sweep") {
      for (const json& r : j.at("rows")) {
        absl::StrAppendFormat(
            &out, "%s=%-10s %-15s %7d  %.4f  [%.4f, %.4f]  leak %.5f\n",
            r.at("axis").get<std::string>(), r.at("value").get<std::string>(),
            r.at("attack").get<std::string>(), r.at("evaluated").get<int64_t>(),
            r.at("accuracy").get<double>(), r.at("ci_lo").get<double>(),
            r.at("ci_hi").get<double>(), r.at("leak_bits").get<double>());
      }
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown report kind '", kind, "'"));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed report: ", e.what()));
  }
  return out;
}

}  // namespace kljn::harness

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

#include "kljn/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "config_json.h"
#include "json.hpp"

namespace kljn::harness {
namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed. The first
// error wins; Finish() also rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) Fail(path_, "must be an object");
  }

  void Number(const char* key, double& out) {
    const json* v = Take(key);
    if (v == nullptr) return;
    if (!v->is_number()) return Fail(Path(key), "must be a number");
    out = v->get<double>();
  }
  void Integer(const char* key, int64_t& out) {
    const json* v = Take(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) return Fail(Path(key), "must be an integer");
    out = v->get<int64_t>();
  }
  void Int(const char* key, int& out) {
    int64_t wide = out;
    Integer(key, wide);
    if (wide < INT32_MIN || wide > INT32_MAX) {
      return Fail(Path(key), "out of range");
    }
    out = static_cast<int>(wide);
  }
  void Unsigned(const char* key, uint64_t& out) {
    const json* v = Take(key);
    if (v == nullptr) return;
    if (v->is_number_unsigned()) {
      out = v->get<uint64_t>();
    } else {
      Fail(Path(key), "must be a non-negative integer");
    }
  }
  void Bool(const char* key, bool& out) {
    const json* v = Take(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) return Fail(Path(key), "must be true or false");
    out = v->get<bool>();
  }
  void String(const char* key, std::string& out) {
    const json* v = Take(key);
    if (v == nullptr) return;
    if (!v->is_string()) return Fail(Path(key), "must be a string");
    out = v->get<std::string>();
  }
  // Nullptr when absent.
  const json* Child(const char* key) { return Take(key); }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : absl::StrCat(path_, ".", key);
  }

  void Fail(const std::string& where, const std::string& what) {
    if (status_.ok()) {
      status_ = absl::InvalidArgumentError(absl::StrCat(where, ": ", what));
    }
  }
  void Merge(const absl::Status& s) {
    if (status_.ok() && !s.ok()) status_ = s;
  }

  absl::Status Finish() {
    if (status_.ok() && object_.is_object()) {
      for (auto it = object_.begin(); it != object_.end(); ++it) {
        if (!seen_.contains(it.key())) {
          Fail(Path(it.key()), "unknown key");
          break;
        }
      }
    }
    return status_;
  }

 private:
  const json* Take(const char* key) {
    if (!object_.is_object()) return nullptr;
    seen_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
  absl::Status status_;
};

absl::Status ParseSampling(const json& j, SamplingSpec& s) {
  ObjectReader r(j, "sampling");
  r.Number("bandwidth_hz", s.bandwidth_hz);
  r.Number("sample_rate_hz", s.sample_rate_hz);
  r.Number("bit_period_s", s.bit_period_s);
  return r.Finish();
}

absl::Status ParseResistors(const json& j, SessionConfig& s) {
  ObjectReader r(j, "resistors");
  r.Number("low_ohm", s.pair.low_ohm);
  r.Number("high_ohm", s.pair.high_ohm);
  r.Number("min_ratio", s.min_ratio);
  return r.Finish();
}

absl::Status ParseTemperatures(const json& j, Temperatures& t) {
  ObjectReader r(j, "temperatures");
  r.Number("alice_k", t.alice_k);
  r.Number("bob_k", t.bob_k);
  return r.Finish();
}

absl::Status ParseWire(const json& j, SessionConfig& s) {
  ObjectReader r(j, "wire");
  r.Number("resistance_ohm", s.wire_ohm);
  r.Number("eve_tap_fraction", s.tap_fraction);
  r.Number("measurement_noise_v", s.measurement_noise_v);
  r.Number("measurement_noise_a", s.measurement_noise_a);
  return r.Finish();
}

absl::Status ParseNoise(const json& j, SessionConfig& s) {
  ObjectReader r(j, "noise");
  std::string name(DistributionName(s.distribution));
  r.String("distribution", name);
  if (absl::Status st = r.Finish(); !st.ok()) return st;
  absl::StatusOr<Distribution> d = ParseDistribution(name);
  if (!d.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise.distribution: ", d.status().message()));
  }
  s.distribution = *d;
  return absl::OkStatus();
}

absl::Status ParseAttacks(const json& j, RunConfig& c) {
  ObjectReader r(j, "attacks");
  eve::AttackSelection& a = c.attacks;
  auto flag = [&](const char* key, eve::AttackKind kind) {
    r.Bool(key, a.enabled[static_cast<int>(kind)]);
  };
  flag("passive", eve::AttackKind::kPassiveLevel);
  flag("scheuer_yariv", eve::AttackKind::kScheuerYariv);
  flag("hao", eve::AttackKind::kHao);
  flag("cumulant", eve::AttackKind::kCumulant);
  if (const json* inj = r.Child("injection")) {
    ObjectReader ir(*inj, "attacks.injection");
    ir.Bool("enabled", a.enabled[static_cast<int>(eve::AttackKind::kInjection)]);
    ir.Number("gamma", a.injection.gamma);
    ir.Number("fraction", a.injection.fraction);
    r.Merge(ir.Finish());
  }
  r.Number("extra_series_resistance_ohm", c.session.extra_series_ohm);
  r.Unsigned("seed", a.seed);
  return r.Finish();
}

absl::Status ParseDefense(const json& j, DefenseConfig& d) {
  ObjectReader r(j, "defense");
  r.Bool("enabled", d.enabled);
  if (const json* cmp = r.Child("comparison")) {
    ObjectReader cr(*cmp, "defense.comparison");
    defense::ComparisonPolicy& p = d.comparison;
    cr.Number("voltage_abs_v", p.voltage_abs_v);
    cr.Number("voltage_rel", p.voltage_rel);
    cr.Number("current_abs_a", p.current_abs_a);
    cr.Number("current_rel", p.current_rel);
    cr.Number("spectrum_tol", p.spectrum_tol);
    cr.Number("out_of_band_limit", p.out_of_band_limit);
    cr.Int("quant_bits", p.quant_bits);
    cr.Int("consecutive_alarms_to_abort", p.consecutive_alarms_to_abort);
    r.Merge(cr.Finish());
  }
  if (const json* risk = r.Child("risk")) {
    ObjectReader rr(*risk, "defense.risk");
    rr.Number("threshold", d.risk.threshold);
    rr.Number("gaussianity_gate_sigmas", d.risk.gaussianity_gate_sigmas);
    r.Merge(rr.Finish());
  }
  if (const json* probe = r.Child("probe")) {
    ObjectReader pr(*probe, "defense.probe");
    pr.Number("fraction", d.probe_fraction);
    pr.Number("current_amplitude_a", d.probe.current_amplitude_a);
    pr.Number("frequency_hz", d.probe.frequency_hz);
    pr.Number("measurement_noise_v", d.probe.measurement_noise_v);
    pr.Number("tolerance_sigmas", d.probe.tolerance_sigmas);
    r.Merge(pr.Finish());
  }
  return r.Finish();
}

absl::Status ParseRun(const json& j, RunConfig& c) {
  ObjectReader r(j, "run");
  r.Integer("exchanges", c.exchanges);
  r.Unsigned("seed", c.session.master_seed);
  r.Number("ci_level", c.ci_level);
  return r.Finish();
}

absl::Status ParseOutput(const json& j, OutputConfig& o) {
  ObjectReader r(j, "output");
  r.String("dir", o.dir);
  r.Bool("trace_dump", o.trace_dump);
  r.Bool("guess_csv", o.guess_csv);
  return r.Finish();
}

absl::Status ParseSweep(const json& j, std::optional<SweepConfig>& out) {
  ObjectReader r(j, "sweep");
  std::string axis_name;
  r.String("axis", axis_name);
  const json* values = r.Child("values");
  if (absl::Status s = r.Finish(); !s.ok()) return s;
  absl::StatusOr<SweepAxis> axis = ParseSweepAxis(axis_name);
  if (!axis.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("sweep.axis: ", axis.status().message()));
  }
  SweepConfig sweep;
  sweep.axis = *axis;
  if (values == nullptr || !values->is_array()) {
    return absl::InvalidArgumentError("sweep.values: must be an array");
  }
  for (const json& v : *values) {
    if (sweep.axis == SweepAxis::kDistribution) {
      if (!v.is_string()) {
        return absl::InvalidArgumentError("sweep.values: expected strings");
      }
      absl::StatusOr<Distribution> d = ParseDistribution(v.get<std::string>());
      if (!d.ok()) return d.status();
      sweep.values.emplace_back(*d);
    } else {
      if (!v.is_number()) {
        return absl::InvalidArgumentError("sweep.values: expected numbers");
      }
      sweep.values.emplace_back(v.get<double>());
    }
  }
  out = std::move(sweep);
  return absl::OkStatus();
}

}  // namespace

std::string_view SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kWireResistance:
      return "wire_R";
    case SweepAxis::kTemperatureRatio:
      return "temperature_ratio";
    case SweepAxis::kDistribution:
      return "distribution";
    case SweepAxis::kTau:
      return "tau";
  }
  return "?";
}

absl::StatusOr<SweepAxis> ParseSweepAxis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::kWireResistance, SweepAxis::kTemperatureRatio,
                      SweepAxis::kDistribution, SweepAxis::kTau}) {
    if (SweepAxisName(a) == name) return a;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown sweep axis '", std::string(name),
      "' (expected wire_R, temperature_ratio, distribution or tau)"));
}

std::string SweepValueLabel(const SweepValue& value) {
  if (const Distribution* d = std::get_if<Distribution>(&value)) {
    return std::string(DistributionName(*d));
  }
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(value));
  return std::string(buf, end);
}

absl::Status SweepConfig::Validate() const {
  if (values.empty()) return absl::InvalidArgumentError("sweep grid is empty");
  for (const SweepValue& v : values) {
    const bool is_dist = std::holds_alternative<Distribution>(v);
    if (is_dist != (axis == SweepAxis::kDistribution)) {
      return absl::InvalidArgumentError(
          absl::StrCat("sweep value ", SweepValueLabel(v), " does not fit axis ",
                       std::string(SweepAxisName(axis))));
    }
    if (!is_dist) {
      const double x = std::get<double>(v);
      const bool positive_axis = axis != SweepAxis::kWireResistance;
      if (!std::isfinite(x) || x < 0 || (positive_axis && x == 0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("sweep value ", x, " out of range for ",
                         std::string(SweepAxisName(axis))));
      }
    }
  }
  return absl::OkStatus();
}

absl::Status RunConfig::Validate() const {
  if (absl::Status s = session.Validate(); !s.ok()) return s;
  if (absl::Status s = defense.Validate(); !s.ok()) return s;
  if (absl::Status s = attacks.injection.Validate(); !s.ok()) return s;
  if (exchanges < 0) {
    return absl::InvalidArgumentError("run.exchanges must be >= 0");
  }
  if (!(ci_level > 0 && ci_level < 1)) {
    return absl::InvalidArgumentError("run.ci_level must lie in (0, 1)");
  }
  if (sweep.has_value()) return sweep->Validate();
  return absl::OkStatus();
}

absl::StatusOr<RunConfig> ParseConfig(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    return absl::InvalidArgumentError("config is not valid JSON");
  }
  RunConfig c;
  ObjectReader r(root, "");
  if (const json* j = r.Child("sampling")) r.Merge(ParseSampling(*j, c.session.sampling));
  if (const json* j = r.Child("resistors")) r.Merge(ParseResistors(*j, c.session));
  if (const json* j = r.Child("temperatures")) {
    r.Merge(ParseTemperatures(*j, c.session.temperatures));
  }
  if (const json* j = r.Child("wire")) r.Merge(ParseWire(*j, c.session));
  if (const json* j = r.Child("noise")) r.Merge(ParseNoise(*j, c.session));
  if (const json* j = r.Child("attacks")) r.Merge(ParseAttacks(*j, c));
  if (const json* j = r.Child("defense")) r.Merge(ParseDefense(*j, c.defense));
  if (const json* j = r.Child("run")) r.Merge(ParseRun(*j, c));
  if (const json* j = r.Child("output")) r.Merge(ParseOutput(*j, c.output));
  if (const json* j = r.Child("sweep")) r.Merge(ParseSweep(*j, c.sweep));
  if (absl::Status s = r.Finish(); !s.ok()) return s;
  if (absl::Status s = c.Validate(); !s.ok()) return s;
  return c;
}

absl::StatusOr<RunConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<RunConfig> c = ParseConfig(buffer.str());
  if (!c.ok()) {
    return absl::Status(c.status().code(),
                        absl::StrCat(path, ": ", c.status().message()));
  }
  return c;
}

namespace internal {

json ConfigToJsonValue(const RunConfig& c) {
  const SessionConfig& s = c.session;
  const DefenseConfig& d = c.defense;
  const eve::AttackSelection& a = c.attacks;
  auto on = [&](eve::AttackKind k) { return a.Enabled(k); };
  json j;
  j["sampling"] = {{"bandwidth_hz", s.sampling.bandwidth_hz},
                   {"sample_rate_hz", s.sampling.sample_rate_hz},
                   {"bit_period_s", s.sampling.bit_period_s}};
  j["resistors"] = {{"low_ohm", s.pair.low_ohm},
                    {"high_ohm", s.pair.high_ohm},
                    {"min_ratio", s.min_ratio}};
  j["temperatures"] = {{"alice_k", s.temperatures.alice_k},
                       {"bob_k", s.temperatures.bob_k}};
  j["wire"] = {{"resistance_ohm", s.wire_ohm},
               {"eve_tap_fraction", s.tap_fraction},
               {"measurement_noise_v", s.measurement_noise_v},
               {"measurement_noise_a", s.measurement_noise_a}};
  j["noise"] = {{"distribution", std::string(DistributionName(s.distribution))}};
  j["attacks"] = {
      {"passive", on(eve::AttackKind::kPassiveLevel)},
      {"scheuer_yariv", on(eve::AttackKind::kScheuerYariv)},
      {"hao", on(eve::AttackKind::kHao)},
      {"cumulant", on(eve::AttackKind::kCumulant)},
      {"injection",
       {{"enabled", on(eve::AttackKind::kInjection)},
        {"gamma", a.injection.gamma},
        {"fraction", a.injection.fraction}}},
      {"extra_series_resistance_ohm", s.extra_series_ohm},
      {"seed", a.seed}};
  j["defense"] = {
      {"enabled", d.enabled},
      {"comparison",
       {{"voltage_abs_v", d.comparison.voltage_abs_v},
        {"voltage_rel", d.comparison.voltage_rel},
        {"current_abs_a", d.comparison.current_abs_a},
        {"current_rel", d.comparison.current_rel},
        {"spectrum_tol", d.comparison.spectrum_tol},
        {"out_of_band_limit", d.comparison.out_of_band_limit},
        {"quant_bits", d.comparison.quant_bits},
        {"consecutive_alarms_to_abort",
         d.comparison.consecutive_alarms_to_abort}}},
      {"risk",
       {{"threshold", d.risk.threshold},
        {"gaussianity_gate_sigmas", d.risk.gaussianity_gate_sigmas}}},
      {"probe",
       {{"fraction", d.probe_fraction},
        {"current_amplitude_a", d.probe.current_amplitude_a},
        {"frequency_hz", d.probe.frequency_hz},
        {"measurement_noise_v", d.probe.measurement_noise_v},
        {"tolerance_sigmas", d.probe.tolerance_sigmas}}}};
  j["run"] = {{"exchanges", c.exchanges},
              {"seed", s.master_seed},
              {"ci_level", c.ci_level}};
  j["output"] = {{"dir", c.output.dir},
                 {"trace_dump", c.output.trace_dump},
                 {"guess_csv", c.output.guess_csv}};
  if (c.sweep.has_value()) {
    json values = json::array();
    for (const SweepValue& v : c.sweep->values) {
      if (const Distribution* dist = std::get_if<Distribution>(&v)) {
        values.push_back(std::string(DistributionName(*dist)));
      } else {
        values.push_back(std::get<double>(v));
      }
    }
    j["sweep"] = {{"axis", std::string(SweepAxisName(c.sweep->axis))},
                  {"values", values}};
  }
  return j;
}

}  // namespace internal

std::string ConfigToJson(const RunConfig& config, int indent) {
  return internal::ConfigToJsonValue(config).dump(indent);
}

absl::StatusOr<std::vector<SweepValue>> ParseSweepValues(SweepAxis axis,
                                                         std::string_view csv) {
  std::vector<SweepValue> values;
  for (absl::string_view raw : absl::StrSplit(
           absl::string_view(csv.data(), csv.size()), ',', absl::SkipEmpty())) {
    absl::string_view item = absl::StripAsciiWhitespace(raw);
    if (item.empty()) continue;
    if (axis == SweepAxis::kDistribution) {
      absl::StatusOr<Distribution> d =
          ParseDistribution(std::string_view(item.data(), item.size()));
      if (!d.ok()) return d.status();
      values.emplace_back(*d);
    } else {
      double x = 0.0;
      if (!absl::SimpleAtod(item, &x)) {
        return absl::InvalidArgumentError(
            absl::StrCat("sweep value '", item, "' is not a number"));
      }
      values.emplace_back(x);
    }
  }
  SweepConfig check{axis, values};
  if (absl::Status s = check.Validate(); !s.ok()) return s;
  return values;
}

absl::StatusOr<RunConfig> ApplySweepPoint(const RunConfig& base, SweepAxis axis,
                                          const SweepValue& value) {
  SweepConfig check{axis, {value}};
  if (absl::Status s = check.Validate(); !s.ok()) return s;
  RunConfig c = base;
  c.sweep.reset();
  SessionConfig& s = c.session;
  switch (axis) {
    case SweepAxis::kWireResistance:
      s.wire_ohm = std::get<double>(value) * s.pair.low_ohm;
      break;
    case SweepAxis::kTemperatureRatio:
      s.temperatures.bob_k = std::get<double>(value) * s.temperatures.alice_k;
      break;
    case SweepAxis::kDistribution:
      s.distribution = std::get<Distribution>(value);
      break;
    case SweepAxis::kTau:
      s.sampling.bit_period_s = std::get<double>(value);
      break;
  }
  if (absl::Status st = c.Validate(); !st.ok()) return st;
  return c;
}

}  // namespace kljn::harness

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

#ifndef KLJN_CONFIG_H_
#define KLJN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/eve.h"
#include "kljn/protocol.h"

namespace kljn::harness {

enum class SweepAxis : uint8_t { kWireResistance, kTemperatureRatio, kDistribution, kTau };
std::string_view SweepAxisName(SweepAxis axis);
absl::StatusOr<SweepAxis> ParseSweepAxis(std::string_view name);

// wire_R values are fractions of R_L, temperature_ratio is T_b / T_a and tau
// is in seconds.
using SweepValue = std::variant<double, Distribution>;
std::string SweepValueLabel(const SweepValue& value);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kWireResistance;
  std::vector<SweepValue> values;

  absl::Status Validate() const;
};

struct OutputConfig {
  std::string dir = "out";
  bool trace_dump = false;
  bool guess_csv = false;
};

// The fully resolved experiment description. Every field has a default, so
// an empty JSON object is a valid config.
struct RunConfig {
  SessionConfig session;
  DefenseConfig defense;
  eve::AttackSelection attacks;
  int64_t exchanges = 1000;
  double ci_level = 0.95;
  OutputConfig output;
  std::optional<SweepConfig> sweep;

  absl::Status Validate() const;
};

// Strict parse: unknown keys, wrong types and invalid values are
// InvalidArgument errors that name the offending key.
absl::StatusOr<RunConfig> ParseConfig(std::string_view json_text);
absl::StatusOr<RunConfig> LoadConfig(const std::string& path);

// Canonical JSON of the resolved config (every key present). Parsing the
// output yields an equal config.
std::string ConfigToJson(const RunConfig& config, int indent = 2);

// Parses sweep values given on the command line, e.g. "0,0.01,0.1" or
// "gaussian,uniform".
absl::StatusOr<std::vector<SweepValue>> ParseSweepValues(SweepAxis axis,
                                                         std::string_view csv);

// The config of one sweep grid point.
absl::StatusOr<RunConfig> ApplySweepPoint(const RunConfig& base, SweepAxis axis,
                                          const SweepValue& value);

}  // namespace kljn::harness

#endif  // KLJN_CONFIG_H_

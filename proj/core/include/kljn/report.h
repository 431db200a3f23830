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

#ifndef KLJN_REPORT_H_
#define KLJN_REPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "kljn/config.h"
#include "kljn/experiments.h"

namespace kljn::harness {

// Bits (one per byte, 0 or 1) packed MSB first; the tail byte is zero padded.
std::vector<uint8_t> PackBits(std::span<const uint8_t> bits);
std::string HexKey(std::span<const uint8_t> bits);

// Deterministic JSON: the same experiment always serializes to the same
// bytes. Embeds the resolved config and the code identifier.
std::string ExchangeReportJson(const ExchangeExperiment& experiment);
std::string CalibrationReportJson(const CalibrationReport& report,
                                  const RunConfig& config);
std::string SweepReportJson(std::span<const SweepRow> rows,
                            const RunConfig& config);

// report.json and key.bin (Alice's packed key), plus guesses.csv when the
// config asks for it.
absl::Status WriteExchangeArtifacts(const ExchangeExperiment& experiment,
                                    const std::string& dir);

absl::Status WriteTextFile(const std::string& path, std::string_view content);
absl::StatusOr<std::string> ReadTextFile(const std::string& path);

// Human-readable rendering of any report written by this library.
absl::StatusOr<std::string> FormatReport(std::string_view json_text);

}  // namespace kljn::harness

#endif  // KLJN_REPORT_H_

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

// kljnsim: calibrate, run key exchanges under attack, sweep leak against a
// non-ideality, and pretty-print stored reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "kljn/config.h"
#include "kljn/experiments.h"
#include "kljn/report.h"
#include "kljn/version.h"

namespace {

using kljn::harness::RunConfig;

enum ExitCode {
  kOk = 0,
  kOtherError = 1,
  kValidationError = 2,
  kSecurityAbort = 3,
  kCalibrationFailure = 4,
};

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  int workers = 1;
  std::string out_dir;
};

int Fail(const absl::Status& status, int code) {
  std::cerr << "kljnsim: " << status.message() << "\n";
  return code;
}

int ExitFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kNotFound:
      return Fail(status, kValidationError);
    default:
      return Fail(status, kOtherError);
  }
}

absl::StatusOr<RunConfig> Resolve(const CommonFlags& flags) {
  absl::StatusOr<RunConfig> config =
      flags.config_path.empty() ? kljn::harness::ParseConfig("{}")
                                : kljn::harness::LoadConfig(flags.config_path);
  if (!config.ok()) return config.status();
  if (flags.seed.has_value()) config->session.master_seed = *flags.seed;
  if (!flags.out_dir.empty()) config->output.dir = flags.out_dir;
  if (flags.workers < 1) {
    return absl::InvalidArgumentError("--workers must be >= 1");
  }
  if (absl::Status s = config->Validate(); !s.ok()) return s;
  return config;
}

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run config");
  cmd->add_option("--seed", flags.seed, "Master seed (overrides run.seed)");
  cmd->add_option("--workers", flags.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", flags.out_dir, "Output directory");
}

absl::Status EnsureDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError("cannot create " + dir);
  return absl::OkStatus();
}

int Calibrate(const CommonFlags& flags) {
  absl::StatusOr<RunConfig> config = Resolve(flags);
  if (!config.ok()) return ExitFor(config.status());
  absl::StatusOr<kljn::harness::CalibrationReport> report =
      kljn::harness::RunCalibration(*config, flags.workers);
  if (!report.ok()) return ExitFor(report.status());
  const std::string json =
      kljn::harness::CalibrationReportJson(*report, *config);
  if (absl::Status s = EnsureDir(config->output.dir); !s.ok()) {
    return Fail(s, kOtherError);
  }
  const std::string path = config->output.dir + "/calibration.json";
  if (absl::Status s = kljn::harness::WriteTextFile(path, json); !s.ok()) {
    return Fail(s, kOtherError);
  }
  if (absl::StatusOr<std::string> text = kljn::harness::FormatReport(json);
      text.ok()) {
    std::cout << *text;
  }
  if (!report->Passed()) {
    std::cerr << "kljnsim: calibration check '" << report->FirstFailure()
              << "' failed\n";
    return kCalibrationFailure;
  }
  return kOk;
}

int Exchange(const CommonFlags& flags, bool trace_dump) {
  absl::StatusOr<RunConfig> config = Resolve(flags);
  if (!config.ok()) return ExitFor(config.status());
  if (trace_dump) config->output.trace_dump = true;
  kljn::harness::ExperimentOptions options;
  options.workers = flags.workers;
  if (config->output.trace_dump) {
    options.trace_dump_dir = config->output.dir + "/traces";
  }
  absl::StatusOr<kljn::harness::ExchangeExperiment> experiment =
      kljn::harness::RunExchangeExperiment(*config, options);
  if (!experiment.ok()) return ExitFor(experiment.status());
  if (absl::Status s = kljn::harness::WriteExchangeArtifacts(
          *experiment, config->output.dir);
      !s.ok()) {
    return Fail(s, kOtherError);
  }
  if (absl::StatusOr<std::string> text = kljn::harness::FormatReport(
          kljn::harness::ExchangeReportJson(*experiment));
      text.ok()) {
    std::cout << *text;
  }
  if (experiment->run.aborted) {
    std::cerr << "kljnsim: session aborted: " << experiment->run.abort_reason
              << "\n";
    return kSecurityAbort;
  }
  return kOk;
}

int Sweep(const CommonFlags& flags, const std::string& axis,
          const std::string& values) {
  absl::StatusOr<RunConfig> config = Resolve(flags);
  if (!config.ok()) return ExitFor(config.status());
  kljn::harness::SweepConfig sweep;
  if (config->sweep.has_value()) sweep = *config->sweep;
  if (!axis.empty()) {
    absl::StatusOr<kljn::harness::SweepAxis> a =
        kljn::harness::ParseSweepAxis(axis);
    if (!a.ok()) return ExitFor(a.status());
    if (*a != sweep.axis) sweep.values.clear();
    sweep.axis = *a;
  }
  if (!values.empty()) {
    absl::StatusOr<std::vector<kljn::harness::SweepValue>> v =
        kljn::harness::ParseSweepValues(sweep.axis, values);
    if (!v.ok()) return ExitFor(v.status());
    sweep.values = std::move(*v);
  }
  if (absl::Status s = sweep.Validate(); !s.ok()) return ExitFor(s);
  config->sweep = sweep;

  kljn::harness::ExperimentOptions options;
  options.workers = flags.workers;
  absl::StatusOr<std::vector<kljn::harness::SweepRow>> rows =
      kljn::harness::RunSweep(*config, sweep, options);
  if (!rows.ok()) return ExitFor(rows.status());
  if (absl::Status s = EnsureDir(config->output.dir); !s.ok()) {
    return Fail(s, kOtherError);
  }
  if (absl::Status s = kljn::harness::WriteSweepCsv(
          *rows, config->output.dir + "/sweep.csv");
      !s.ok()) {
    return Fail(s, kOtherError);
  }
  const std::string json = kljn::harness::SweepReportJson(*rows, *config);
  if (absl::Status s = kljn::harness::WriteTextFile(
          config->output.dir + "/sweep.json", json);
      !s.ok()) {
    return Fail(s, kOtherError);
  }
  if (absl::StatusOr<std::string> text = kljn::harness::FormatReport(json);
      text.ok()) {
    std::cout << *text;
  }
  return kOk;
}

int Report(const std::string& path) {
  absl::StatusOr<std::string> json = kljn::harness::ReadTextFile(path);
  if (!json.ok()) return ExitFor(json.status());
  absl::StatusOr<std::string> text = kljn::harness::FormatReport(*json);
  if (!text.ok()) return ExitFor(text.status());
  std::cout << *text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kirchhoff-law-Johnson-noise key exchange simulator"};
  app.set_version_flag("--version", std::string(kljn::kCodeIdentifier));
  app.require_subcommand(1);

  CommonFlags calibrate_flags;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Check the noise and loop models");
  AddCommon(calibrate, calibrate_flags);

  CommonFlags exchange_flags;
  bool trace_dump = false;
  CLI::App* exchange =
      app.add_subcommand("exchange", "Run a key exchange with Eve attacking");
  AddCommon(exchange, exchange_flags);
  exchange->add_flag("--trace-dump", trace_dump,
                     "Write one trace CSV per exchange");

  CommonFlags sweep_flags;
  std::string axis, values;
  CLI::App* sweep = app.add_subcommand(
      "attack-sweep", "Tabulate attack accuracy against one parameter");
  AddCommon(sweep, sweep_flags);
  sweep->add_option("--axis", axis,
                    "wire_R, temperature_ratio, distribution or tau");
  sweep->add_option("--values", values, "Comma-separated grid");

  std::string report_path;
  CLI::App* report = app.add_subcommand("report", "Pretty-print a report");
  report->add_option("path", report_path, "report.json or calibration.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  if (*calibrate) return Calibrate(calibrate_flags);
  if (*exchange) return Exchange(exchange_flags, trace_dump);
  if (*sweep) return Sweep(sweep_flags, axis, values);
  if (*report) return Report(report_path);
  return kOtherError;
}

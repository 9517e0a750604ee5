// Copyright 2026 The causal-eval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// causal_eval simulate|audit|report
//
// Exit status: 0 on success, 1 when the audit finds a holds-predicted cell
// inconsistent, 2 on any error.

#include <algorithm>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.h"

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

void AddRunOptions(CLI::App* command, causal_eval::CommandOptions& options,
                   std::optional<std::string>& out, std::optional<uint64_t>& seed,
                   std::optional<int>& replicates) {
  command->add_option("--manifest", options.manifest, "experiment manifest (JSON)")->required();
  command->add_option("--out", out, "output directory (overrides the manifest)");
  command->add_option("--seed", seed, "base seed (overrides the manifest)");
  command->add_option("--threads", options.threads, "worker threads")->check(CLI::PositiveNumber);
  command->add_option("--replicates", replicates, "bootstrap replicates (overrides the manifest)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled disaggregated evaluation under subgroup shift"};
  app.require_subcommand(1);

  causal_eval::CommandOptions options;
  options.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::string> out;
  std::optional<uint64_t> seed;
  std::optional<int> replicates;

  CLI::App* simulate = app.add_subcommand("simulate", "write train/test CSVs per setting");
  AddRunOptions(simulate, options, out, seed, replicates);
  CLI::App* audit = app.add_subcommand("audit", "run the audit and write the report");
  AddRunOptions(audit, options, out, seed, replicates);

  CLI::App* report = app.add_subcommand("report", "summarize a report JSON");
  std::string report_path;
  std::optional<std::string> report_out;
  report->add_option("report", report_path, "report.json written by audit")->required();
  report->add_option("--out", report_out, "directory for the plot-data CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }
  options.out = out;
  options.seed = seed;
  options.replicates = replicates;

  if (simulate->parsed()) {
    if (auto status = causal_eval::Simulate(options, std::cerr); !status.ok()) {
      std::cerr << "error: " << status.message() << '\n';
      return kExitError;
    }
    return 0;
  }
  if (audit->parsed()) {
    auto violations = causal_eval::Audit(options, std::cerr);
    if (!violations.ok()) {
      std::cerr << "error: " << violations.status().message() << '\n';
      return kExitError;
    }
    return *violations > 0 ? kExitViolations : 0;
  }
  if (auto status = causal_eval::Report(report_path, report_out, std::cout); !status.ok()) {
    std::cerr << "error: " << status.message() << '\n';
    return kExitError;
  }
  return 0;
}

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

// The simulate, audit and report commands, callable without a process.

#ifndef CAUSAL_EVAL_TOOLS_COMMANDS_H_
#define CAUSAL_EVAL_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace causal_eval {

struct CommandOptions {
  std::string manifest;
  // Overrides of the manifest fields.
  std::optional<std::string> out;
  std::optional<uint64_t> seed;
  std::optional<int> replicates;
  int threads = 1;
};

// Writes <out>/<index>_<setting>/{train,test}.csv and dataset.json per
// synthetic setting.
absl::Status Simulate(const CommandOptions& options, std::ostream& log);

// Writes <out>/report.json, the figure CSVs and the resolved manifest.
// Returns the number of holds-predicted cells found inconsistent.
absl::StatusOr<int> Audit(const CommandOptions& options, std::ostream& log);

// Prints the summary of a report file and, when `out_dir` is set, writes the
// figure CSVs there.
absl::Status Report(const std::string& report_path, const std::optional<std::string>& out_dir,
                    std::ostream& out);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_TOOLS_COMMANDS_H_

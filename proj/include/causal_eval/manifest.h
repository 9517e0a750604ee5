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

// JSON experiment manifests.
//
//   {
//     "schema_version": 1,
//     "dgp": {"family": "outcome_shift", "selection": "y"}   // or a list, or "all"
//     "external": {                                           // instead of "dgp"
//       "train": "data.csv", "test": "holdout.csv",           // test optional
//       "covariates": ["x0"], "group": "a", "label": "y",
//       "group_order": ["0", "1"], "test_fraction": 0.3
//     },
//     "n_train": 50000, "n_test": 20000,
//     "policies": ["agnostic", "aware", "stratified"],
//     "metrics": ["log_loss", ...],
//     "control_vars": ["none", "X", "Y", "R"],
//     "weight_scheme": "pop_to_subgroup",
//     "bootstrap": {"replicates": 1000, "ci_level": 0.95},
//     "seed": 0, "out": "out", "oracle_scores": false
//   }
//
// Relative external paths resolve against the manifest's directory.

#ifndef CAUSAL_EVAL_MANIFEST_H_
#define CAUSAL_EVAL_MANIFEST_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "causal_eval/audit.h"
#include "causal_eval/dataset.h"
#include "causal_eval/dgp.h"
#include "json.hpp"

namespace causal_eval {

inline constexpr int kManifestSchemaVersion = 1;

struct ExternalData {
  std::string train_path;
  // Without a test file the rows are split at random by `test_fraction`.
  std::optional<std::string> test_path;
  ColumnMapping mapping;
  double test_fraction = 0.3;
};

struct ExperimentManifest {
  // Exactly one of `settings` and `external` is used.
  std::vector<DgpSpec> settings;
  std::optional<ExternalData> external;
  int64_t n_train = 50000;
  int64_t n_test = 20000;
  std::vector<CovariatePolicy> policies = {CovariatePolicy::kAgnostic, CovariatePolicy::kAware,
                                           CovariatePolicy::kStratified};
  std::vector<MetricId> metrics = AllMetrics();
  std::vector<std::optional<ControlVariable>> controls = {
      std::nullopt, ControlVariable::kX, ControlVariable::kY, ControlVariable::kR};
  WeightScheme scheme;
  int replicates = 1000;
  double ci_level = 0.95;
  uint64_t seed = 0;
  std::string out = "out";
  bool oracle_scores = false;

  AuditConfig ToAuditConfig(int threads) const;
};

// `base_dir` resolves relative external paths.
absl::StatusOr<ExperimentManifest> ManifestFromJson(const nlohmann::json& value,
                                                    const std::string& base_dir = "");
absl::StatusOr<ExperimentManifest> ReadManifestFile(const std::string& path);
nlohmann::json ManifestToJson(const ExperimentManifest& manifest);

// Seed of setting `index` of a manifest with base seed `seed`.
uint64_t SettingSeed(uint64_t seed, std::size_t index);

// Loaded external rows, split into train and test.
struct ExternalSplit {
  Dataset train;
  Dataset test;
};
absl::StatusOr<ExternalSplit> LoadExternal(const ExternalData& external, uint64_t seed);

// Runs every setting of the manifest and returns the finalized report.
absl::StatusOr<AuditReport> RunManifest(const ExperimentManifest& manifest, int threads);

// The `run` block of the report JSON.
nlohmann::json RunInfo(const ExperimentManifest& manifest);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_MANIFEST_H_

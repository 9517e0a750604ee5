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

#ifndef CAUSAL_EVAL_DATASET_H_
#define CAUSAL_EVAL_DATASET_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace causal_eval {

// Columnar table of (x, a, y[, s]) rows. Covariates are stored row-major so
// that synthetic (one covariate) and external (many covariates) data share a
// single layout. Subgroups are dense integer codes into `group_labels`.
struct Dataset {
  std::size_t num_features = 1;
  std::vector<double> x;
  std::vector<int> a;
  std::vector<int> y;
  // Selection indicator; empty when the data carries none.
  std::vector<int> s;
  std::vector<std::string> feature_names;
  std::vector<std::string> group_labels;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  int num_groups() const { return static_cast<int>(group_labels.size()); }
  bool has_selection() const { return !s.empty(); }

  std::span<const double> Row(std::size_t i) const {
    return {x.data() + i * num_features, num_features};
  }
  double Feature(std::size_t i, std::size_t j) const {
    return x[i * num_features + j];
  }

  // Copy of the listed rows, in the listed order; schema is preserved.
  Dataset Subset(std::span<const std::size_t> rows) const;
  // Rows [begin, end).
  Dataset Slice(std::size_t begin, std::size_t end) const;
  // Row count of every subgroup code.
  std::vector<std::size_t> GroupCounts() const;

  absl::Status Validate() const;
};

// Binary-subgroup schema used by the synthetic processes.
Dataset MakeSyntheticSchema();

// Column roles for reading a CSV file.
struct ColumnMapping {
  std::vector<std::string> covariates;
  std::string group = "a";
  std::string label = "y";
  // Optional selection column.
  std::string selection;
  // Fixed subgroup coding; when empty, codes follow the sorted values found.
  std::vector<std::string> group_order;
};

// Mapping for files in the native `x0[,x1,...],a,y[,s]` layout.
absl::StatusOr<ColumnMapping> NativeMapping(const std::vector<std::string>& header);

// Writes the native layout with 17 significant digits per float.
void WriteCsv(const Dataset& data, std::ostream& out);
absl::Status WriteCsvFile(const Dataset& data, const std::string& path);

// Reads a CSV with a header row. Group values are arbitrary strings, coded in
// sorted order (numerically when every value is an integer). Labels must be
// 0 or 1.
absl::StatusOr<Dataset> ReadCsv(std::istream& in, const ColumnMapping& mapping);
absl::StatusOr<Dataset> ReadCsvFile(const std::string& path,
                                    const std::optional<ColumnMapping>& mapping);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_DATASET_H_

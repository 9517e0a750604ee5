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

#include "causal_eval/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace causal_eval {
namespace {

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> fields;
  for (absl::string_view field : absl::StrSplit(line, ',')) {
    fields.emplace_back(absl::StripAsciiWhitespace(field));
  }
  return fields;
}

// Integer-valued labels sort numerically, anything else lexicographically.
void SortGroupLabels(std::vector<std::string>& labels) {
  const bool numeric = std::all_of(labels.begin(), labels.end(), [](const std::string& v) {
    long long parsed;
    return absl::SimpleAtoi(v, &parsed);
  });
  if (numeric) {
    std::sort(labels.begin(), labels.end(), [](const std::string& l, const std::string& r) {
      long long lv = 0, rv = 0;
      (void)absl::SimpleAtoi(l, &lv);
      (void)absl::SimpleAtoi(r, &rv);
      return lv < rv;
    });
  } else {
    std::sort(labels.begin(), labels.end());
  }
}

absl::StatusOr<int> ParseBinary(const std::string& field, const std::string& column,
                                std::size_t line) {
  double value;
  if (!absl::SimpleAtod(field, &value) || (value != 0.0 && value != 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat("line ", line, ": column '", column,
                                                   "' must be 0 or 1, got '", field, "'"));
  }
  return static_cast<int>(value);
}

}  // namespace

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_features = num_features;
  out.feature_names = feature_names;
  out.group_labels = group_labels;
  out.x.reserve(rows.size() * num_features);
  out.a.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t row : rows) {
    const auto values = Row(row);
    out.x.insert(out.x.end(), values.begin(), values.end());
    out.a.push_back(a[row]);
    out.y.push_back(y[row]);
    if (has_selection()) out.s.push_back(s[row]);
  }
  return out;
}

Dataset Dataset::Slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return Subset(rows);
}

std::vector<std::size_t> Dataset::GroupCounts() const {
  std::vector<std::size_t> counts(group_labels.size(), 0);
  for (int code : a) ++counts[code];
  return counts;
}

absl::Status Dataset::Validate() const {
  if (num_features == 0) return absl::InvalidArgumentError("dataset has no covariates");
  if (feature_names.size() != num_features) {
    return absl::InvalidArgumentError("feature name count does not match covariate arity");
  }
  if (x.size() != y.size() * num_features || a.size() != y.size()) {
    return absl::InvalidArgumentError("dataset columns have inconsistent lengths");
  }
  if (!s.empty() && s.size() != y.size()) {
    return absl::InvalidArgumentError("selection column length mismatch");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) {
      return absl::InvalidArgumentError(absl::StrCat("row ", i, ": label must be 0 or 1"));
    }
    if (a[i] < 0 || a[i] >= num_groups()) {
      return absl::InvalidArgumentError(absl::StrCat("row ", i, ": subgroup code out of range"));
    }
  }
  for (double v : x) {
    if (!std::isfinite(v)) return absl::InvalidArgumentError("non-finite covariate value");
  }
  return absl::OkStatus();
}

Dataset MakeSyntheticSchema() {
  Dataset data;
  data.num_features = 1;
  data.feature_names = {"x0"};
  data.group_labels = {"0", "1"};
  return data;
}

absl::StatusOr<ColumnMapping> NativeMapping(const std::vector<std::string>& header) {
  static const std::regex kCovariate("x[0-9]+");
  ColumnMapping mapping;
  bool has_group = false, has_label = false;
  for (const auto& name : header) {
    if (std::regex_match(name, kCovariate)) {
      mapping.covariates.push_back(name);
    } else if (name == "a") {
      has_group = true;
    } else if (name == "y") {
      has_label = true;
    } else if (name == "s") {
      mapping.selection = "s";
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unexpected column '", name, "'"));
    }
  }
  if (mapping.covariates.empty() || !has_group || !has_label) {
    return absl::InvalidArgumentError("native layout requires x0..,a,y columns");
  }
  return mapping;
}

void WriteCsv(const Dataset& data, std::ostream& out) {
  out << absl::StrJoin(data.feature_names, ",") << ",a,y";
  if (data.has_selection()) out << ",s";
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.num_features; ++j) {
      out << FormatDouble(data.Feature(i, j)) << ',';
    }
    out << data.group_labels[data.a[i]] << ',' << data.y[i];
    if (data.has_selection()) out << ',' << data.s[i];
    out << '\n';
  }
}

absl::Status WriteCsvFile(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path, " for writing"));
  WriteCsv(data, out);
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadCsv(std::istream& in, const ColumnMapping& mapping) {
  std::string line;
  if (!std::getline(in, line)) return absl::InvalidArgumentError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = SplitLine(line);
  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) column_of[header[i]] = i;

  auto find = [&](const std::string& name, const char* role) -> absl::StatusOr<std::size_t> {
    auto it = column_of.find(name);
    if (it == column_of.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing ", role, " column '", name, "'"));
    }
    return it->second;
  };
  if (mapping.covariates.empty()) {
    return absl::InvalidArgumentError("column mapping declares no covariate columns");
  }
  if (mapping.group.empty()) return absl::InvalidArgumentError("column mapping lacks a subgroup column");
  if (mapping.label.empty()) return absl::InvalidArgumentError("column mapping lacks a label column");
  std::vector<std::size_t> covariate_columns;
  for (const auto& name : mapping.covariates) {
    auto column = find(name, "covariate");
    if (!column.ok()) return column.status();
    covariate_columns.push_back(*column);
  }
  auto group_column = find(mapping.group, "subgroup");
  if (!group_column.ok()) return group_column.status();
  auto label_column = find(mapping.label, "label");
  if (!label_column.ok()) return label_column.status();
  std::optional<std::size_t> selection_column;
  if (!mapping.selection.empty()) {
    auto column = find(mapping.selection, "selection");
    if (!column.ok()) return column.status();
    selection_column = *column;
  }

  Dataset data;
  data.num_features = covariate_columns.size();
  data.feature_names = mapping.covariates;
  std::vector<std::string> raw_groups;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitLine(line);
    if (fields.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrCat("line ", line_number, ": expected ",
                                                     header.size(), " fields, got ", fields.size()));
    }
    for (std::size_t column : covariate_columns) {
      double value;
      if (!absl::SimpleAtod(fields[column], &value) || !std::isfinite(value)) {
        return absl::InvalidArgumentError(absl::StrCat("line ", line_number, ": bad covariate '",
                                                       fields[column], "'"));
      }
      data.x.push_back(value);
    }
    raw_groups.push_back(fields[*group_column]);
    auto label = ParseBinary(fields[*label_column], mapping.label, line_number);
    if (!label.ok()) return label.status();
    data.y.push_back(*label);
    if (selection_column) {
      auto selected = ParseBinary(fields[*selection_column], mapping.selection, line_number);
      if (!selected.ok()) return selected.status();
      data.s.push_back(*selected);
    }
  }

  if (mapping.group_order.empty()) {
    std::vector<std::string> labels = raw_groups;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    SortGroupLabels(labels);
    data.group_labels = std::move(labels);
  } else {
    data.group_labels = mapping.group_order;
  }
  std::map<std::string, int> code_of;
  for (std::size_t i = 0; i < data.group_labels.size(); ++i) {
    code_of[data.group_labels[i]] = static_cast<int>(i);
  }
  data.a.reserve(raw_groups.size());
  for (const auto& value : raw_groups) {
    auto it = code_of.find(value);
    if (it == code_of.end()) {
      return absl::InvalidArgumentError(absl::StrCat("unknown subgroup value '", value, "'"));
    }
    data.a.push_back(it->second);
  }
  if (auto status = data.Validate(); !status.ok()) return status;
  return data;
}

absl::StatusOr<Dataset> ReadCsvFile(const std::string& path,
                                    const std::optional<ColumnMapping>& mapping) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  if (mapping) return ReadCsv(in, *mapping);
  std::string header_line;
  if (!std::getline(in, header_line)) return absl::InvalidArgumentError(absl::StrCat(path, " is empty"));
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  auto native = NativeMapping(SplitLine(header_line));
  if (!native.ok()) return native.status();
  in.clear();
  in.seekg(0);
  return ReadCsv(in, *native);
}

}  // namespace causal_eval

// Copyright 2026 The pmean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMEAN_REPORT_HPP
#define PMEAN_REPORT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmean/classifier.hpp"
#include "pmean/types.hpp"

namespace pmean {

struct ReportCell {
  std::string task;
  MetricKind metric = MetricKind::accuracy;
  // Cross-language score for transfer cells, in-language otherwise.
  double score = 0.0;
  double std = 0.0;
  std::optional<double> in_language;
  std::optional<double> drop;  // in_language - score

  friend bool operator==(const ReportCell&, const ReportCell&) = default;
};

struct ReportRow {
  std::string model;
  Index dim = 0;
  std::vector<ReportCell> cells;
  // Unweighted means over cells.
  double sigma = 0.0;
  std::optional<double> sigma_in_language;
  std::optional<double> sigma_drop;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

// Fills the sigma fields from the cells. Drop aggregates are present only
// when every cell carries a drop.
ReportRow make_row(std::string model, Index dim, std::vector<ReportCell> cells);

struct EvalReport {
  std::string title;
  std::vector<std::string> tasks;
  std::vector<ReportRow> rows;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

enum class ReportFormat { json, markdown };

// Markdown prints scores as percentages with one decimal and drops in
// parentheses. JSON follows the versioned schema in docs/formats.md.
std::string emit_report(const EvalReport& report, ReportFormat format);

// Throws FormatError on malformed input or an unknown version.
EvalReport parse_report_json(std::string_view text);

}  // namespace pmean

#endif  // PMEAN_REPORT_HPP

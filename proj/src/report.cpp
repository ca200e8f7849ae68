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

#include "pmean/report.hpp"

#include <cstdio>

#include "json.hpp"
#include "pmean/error.hpp"

namespace pmean {

namespace {

constexpr int kReportVersion = 1;

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string escape_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string format_score(double score, const std::optional<double>& drop) {
  std::string out = percent(score);
  if (drop) out += " (" + percent(*drop) + ")";
  return out;
}

}  // namespace

ReportRow make_row(std::string model, Index dim, std::vector<ReportCell> cells) {
  ReportRow row;
  row.model = std::move(model);
  row.dim = dim;
  row.cells = std::move(cells);
  if (row.cells.empty()) return row;
  const double n = static_cast<double>(row.cells.size());
  double score = 0.0, in_language = 0.0, drop = 0.0;
  bool all_drops = true;
  for (const auto& c : row.cells) {
    score += c.score;
    if (c.drop && c.in_language) {
      drop += *c.drop;
      in_language += *c.in_language;
    } else {
      all_drops = false;
    }
  }
  row.sigma = score / n;
  if (all_drops) {
    row.sigma_in_language = in_language / n;
    row.sigma_drop = drop / n;
  }
  return row;
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::markdown) {
    std::string out;
    if (!report.title.empty()) out += "## " + report.title + "\n\n";
    out += "| Model | d |";
    for (const auto& t : report.tasks) out += " " + escape_cell(t) + " |";
    out += " \xCE\xA3 |\n|:--|--:|";
    for (std::size_t i = 0; i < report.tasks.size(); ++i) out += "--:|";
    out += "--:|\n";
    for (const auto& row : report.rows) {
      out += "| " + escape_cell(row.model) + " | " + std::to_string(row.dim) + " |";
      for (const auto& t : report.tasks) {
        const ReportCell* cell = nullptr;
        for (const auto& c : row.cells)
          if (c.task == t) cell = &c;
        out += " " + (cell ? format_score(cell->score, cell->drop) : std::string("-")) + " |";
      }
      out += " " + format_score(row.sigma, row.sigma_drop) + " |\n";
    }
    return out;
  }

  nlohmann::ordered_json doc;
  doc["format"] = "pmean-report";
  doc["version"] = kReportVersion;
  doc["title"] = report.title;
  doc["tasks"] = report.tasks;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["model"] = row.model;
    r["dim"] = row.dim;
    r["sigma"] = row.sigma;
    if (row.sigma_in_language) r["sigma_in_language"] = *row.sigma_in_language;
    if (row.sigma_drop) r["sigma_drop"] = *row.sigma_drop;
    r["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : row.cells) {
      nlohmann::ordered_json jc;
      jc["task"] = c.task;
      jc["metric"] = std::string(to_string(c.metric));
      jc["score"] = c.score;
      jc["std"] = c.std;
      if (c.in_language) jc["in_language"] = *c.in_language;
      if (c.drop) jc["drop"] = *c.drop;
      r["cells"].push_back(std::move(jc));
    }
    doc["rows"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

EvalReport parse_report_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "pmean-report")
      throw FormatError("report: missing or wrong 'format'");
    const int version = doc.at("version").get<int>();
    if (version != kReportVersion)
      throw FormatError("report: unsupported version " + std::to_string(version));
    EvalReport report;
    report.title = doc.at("title").get<std::string>();
    report.tasks = doc.at("tasks").get<std::vector<std::string>>();
    for (const auto& r : doc.at("rows")) {
      ReportRow row;
      row.model = r.at("model").get<std::string>();
      row.dim = r.at("dim").get<Index>();
      row.sigma = r.at("sigma").get<double>();
      if (r.contains("sigma_in_language"))
        row.sigma_in_language = r.at("sigma_in_language").get<double>();
      if (r.contains("sigma_drop")) row.sigma_drop = r.at("sigma_drop").get<double>();
      for (const auto& c : r.at("cells")) {
        ReportCell cell;
        cell.task = c.at("task").get<std::string>();
        cell.metric = parse_metric(c.at("metric").get<std::string>());
        cell.score = c.at("score").get<double>();
        cell.std = c.at("std").get<double>();
        if (c.contains("in_language")) cell.in_language = c.at("in_language").get<double>();
        if (c.contains("drop")) cell.drop = c.at("drop").get<double>();
        row.cells.push_back(std::move(cell));
      }
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

}  // namespace pmean

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

#include "pmean/eval_harness.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "pmean/error.hpp"
#include "pmean/parallel.hpp"

namespace pmean {

std::vector<std::string> TaskDataset::sentences() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.text);
  return out;
}

std::vector<int> TaskDataset::labels() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.label);
  return out;
}

std::vector<std::size_t> TaskDataset::class_counts() const {
  std::vector<std::size_t> counts(classes.size());
  for (const auto& it : items)
    if (it.label >= 0 && static_cast<std::size_t>(it.label) < counts.size())
      ++counts[static_cast<std::size_t>(it.label)];
  return counts;
}

void TaskDataset::validate() const {
  if (classes.size() < 2)
    throw DataError("task '" + name + "' needs at least two classes, has " +
                    std::to_string(classes.size()));
  if (items.empty()) throw DataError("task '" + name + "' has no items");
  for (const auto& it : items)
    if (it.label < 0 || static_cast<std::size_t>(it.label) >= classes.size())
      throw DataError("task '" + name + "' has an item with an unknown label");
}

TaskDataset read_task(std::istream& in, std::string default_name) {
  TaskDataset ds;
  ds.name = std::move(default_name);
  bool have_metric = false;
  bool in_data = false;
  std::map<std::string, int> label_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto eq = line.find('=');
      const std::string key = eq == std::string::npos ? "" : line.substr(1, eq - 1);
      const std::string value = eq == std::string::npos ? "" : line.substr(eq + 1);
      if (key != "metric" && key != "name" && key != "lang") continue;  // comment
      if (in_data) throw FormatError("header '#" + key + "' after data lines", line_no);
      if (value.empty()) throw FormatError("empty value for '#" + key + "'", line_no);
      try {
        if (key == "metric") {
          ds.metric = parse_metric(value);
          have_metric = true;
        } else if (key == "name") {
          ds.name = value;
        } else {
          ds.language = value;
        }
      } catch (const FormatError& e) {
        throw FormatError(e.what(), line_no);
      }
      continue;
    }

    if (!have_metric)
      throw FormatError("missing '#metric=accuracy|macro_f1' header before data", line_no);
    in_data = true;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("expected 'label<TAB>sentence'", line_no);
    if (tab == 0) throw FormatError("empty label", line_no);
    std::string label = line.substr(0, tab);
    auto [it, inserted] = label_ids.emplace(label, static_cast<int>(ds.classes.size()));
    if (inserted) ds.classes.push_back(label);
    ds.items.push_back({it->second, line.substr(tab + 1)});
  }
  if (!have_metric) throw FormatError("missing '#metric=accuracy|macro_f1' header");
  if (ds.items.empty()) throw DataError("task '" + ds.name + "' has no items");
  if (ds.classes.size() < 2)
    throw DataError("task '" + ds.name + "' needs at least two classes, has " +
                    std::to_string(ds.classes.size()));
  return ds;
}

TaskDataset load_task(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open task file '" + path.string() + "'");
  try {
    return read_task(in, path.stem().string());
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }
}

std::string format_task(const TaskDataset& ds) {
  std::ostringstream out;
  out << "#metric=" << to_string(ds.metric) << '\n';
  if (!ds.name.empty()) out << "#name=" << ds.name << '\n';
  if (ds.language) out << "#lang=" << *ds.language << '\n';
  for (const auto& it : ds.items)
    out << ds.classes[static_cast<std::size_t>(it.label)] << '\t' << it.text << '\n';
  return out.str();
}

TaskDataset canonicalize(const TaskDataset& ds) {
  TaskDataset out = ds;
  out.classes = ds.classes;
  std::sort(out.classes.begin(), out.classes.end());
  std::vector<int> remap(ds.classes.size());
  for (std::size_t i = 0; i < ds.classes.size(); ++i)
    remap[i] = static_cast<int>(std::lower_bound(out.classes.begin(), out.classes.end(),
                                                 ds.classes[i]) -
                                out.classes.begin());
  for (auto& it : out.items)
    if (it.label >= 0 && static_cast<std::size_t>(it.label) < remap.size())
      it.label = remap[static_cast<std::size_t>(it.label)];
  std::sort(out.items.begin(), out.items.end(), [](const TaskItem& a, const TaskItem& b) {
    return a.text != b.text ? a.text < b.text : a.label < b.label;
  });
  return out;
}

TransferPair make_transfer_pair(TaskDataset train, TaskDataset test) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (sorted(train.classes) != sorted(test.classes))
    throw DataError("transfer tasks '" + train.name + "' and '" + test.name +
                    "' have different class sets");
  std::vector<int> remap(test.classes.size());
  for (std::size_t i = 0; i < test.classes.size(); ++i)
    remap[i] = static_cast<int>(
        std::find(train.classes.begin(), train.classes.end(), test.classes[i]) -
        train.classes.begin());
  for (auto& it : test.items) it.label = remap[static_cast<std::size_t>(it.label)];
  test.classes = train.classes;
  return {std::move(train), std::move(test)};
}

namespace {

FeatureTransform znorm_transform() {
  return [](Matrix& train, Matrix& test) {
    const ZNormParams params = znorm_fit(train);
    train = znorm_apply(params, train);
    test = znorm_apply(params, test);
  };
}

void check_same_structure(const PooledConfig& a, const PooledConfig& b) {
  if (a.output_dim() != b.output_dim())
    throw DimensionError("source config has dim " + std::to_string(a.output_dim()) +
                         ", target config has " + std::to_string(b.output_dim()));
  if (a.parts().size() != b.parts().size())
    throw DimensionError("source and target configs have different part counts");
  for (std::size_t i = 0; i < a.parts().size(); ++i) {
    const auto& pa = a.parts()[i];
    const auto& pb = b.parts()[i];
    if (pa.space->dim() != pb.space->dim() || pa.p_values != pb.p_values)
      throw DimensionError("source and target configs differ in part " + std::to_string(i));
  }
}

}  // namespace

EvalScore evaluate_monolingual(const PooledConfig& cfg, const TaskDataset& ds,
                               EvalOptions& options) {
  const TaskDataset canon = canonicalize(ds);
  canon.validate();
  const Matrix x = embed_corpus(cfg, canon.sentences(), options.embed, options.protocol.threads);
  const std::vector<int> y = canon.labels();
  return subsample_validate(x, y, canon.classes, canon.metric, options.protocol,
                            options.znorm ? znorm_transform() : FeatureTransform{});
}

TransferResult evaluate_transfer(const PooledConfig& cfg_src, const PooledConfig& cfg_tgt,
                                 const TransferPair& pair, EvalOptions& options) {
  check_same_structure(cfg_src, cfg_tgt);
  const TrainProtocol& protocol = options.protocol;
  protocol.validate();
  const TaskDataset train = canonicalize(pair.train);
  const TaskDataset test = canonicalize(pair.test);
  train.validate();
  test.validate();
  if (train.classes != test.classes)
    throw DataError("transfer tasks '" + train.name + "' and '" + test.name +
                    "' have different class sets");

  const Matrix x_src = embed_corpus(cfg_src, train.sentences(), options.embed, protocol.threads);
  const std::vector<int> y_src = train.labels();
  const MetricKind metric = train.metric;
  const std::size_t num_classes = train.classes.size();

  // Source data only from here until scoring.
  TransferResult result;
  result.fits.resize(protocol.runs);
  std::vector<double> in_scores(protocol.runs);
  parallel_for(protocol.runs, protocol.threads, [&](std::size_t r) {
    std::mt19937_64 rng(run_split_seed(protocol.seed, r));
    const Split split = stratified_split(y_src, train.classes, protocol.test_fraction, rng);
    Matrix x_train = gather_rows(x_src, split.train);
    Matrix x_test = gather_rows(x_src, split.test);
    RunFit& run = result.fits[r];
    if (options.znorm) {
      run.znorm = znorm_fit(x_train);
      x_train = znorm_apply(*run.znorm, x_train);
      x_test = znorm_apply(*run.znorm, x_test);
    }
    TrainProtocol inner = protocol;
    inner.threads = 1;
    run.model = fit(x_train, gather(y_src, split.train), train.classes, metric, inner,
                    run_fit_seed(protocol.seed, r))
                    .model;
    in_scores[r] = metric_score(gather(y_src, split.test), run.model.predict(x_test),
                                num_classes, metric);
  });

  const Matrix x_tgt = embed_corpus(cfg_tgt, test.sentences(), options.embed, protocol.threads);
  const std::vector<int> y_tgt = test.labels();
  std::vector<double> cross_scores(protocol.runs);
  for (std::size_t r = 0; r < protocol.runs; ++r) {
    const RunFit& run = result.fits[r];
    const Matrix x = run.znorm ? znorm_apply(*run.znorm, x_tgt) : x_tgt;
    cross_scores[r] = metric_score(y_tgt, run.model.predict(x), num_classes, metric);
  }

  result.in_language = EvalScore::from_runs(metric, std::move(in_scores));
  result.cross = EvalScore::from_runs(metric, std::move(cross_scores));
  result.drop = result.in_language.mean - result.cross.mean;
  return result;
}

ReportCell evaluate_cell(const PooledConfig& cfg_src, const PooledConfig* cfg_tgt,
                         const EvalTask& task, EvalOptions& options) {
  ReportCell cell;
  cell.task = task.train.name;
  cell.metric = task.train.metric;
  if (task.test) {
    if (!cfg_tgt) throw DataError("transfer task '" + task.train.name + "' needs a target config");
    const TransferResult t =
        evaluate_transfer(cfg_src, *cfg_tgt, make_transfer_pair(task.train, *task.test), options);
    cell.score = t.cross.mean;
    cell.std = t.cross.std;
    cell.in_language = t.in_language.mean;
    cell.drop = t.drop;
  } else {
    const EvalScore s = evaluate_monolingual(cfg_src, task.train, options);
    cell.score = s.mean;
    cell.std = s.std;
  }
  return cell;
}

EvalReport sweep_pmeans(const std::vector<SpacePair>& spaces,
                        const std::vector<std::vector<PValue>>& p_sets,
                        const std::vector<EvalTask>& tasks, EvalOptions& options) {
  if (tasks.empty()) throw DataError("sweep needs at least one task");
  if (p_sets.empty()) throw DataError("sweep needs at least one p-set");
  if (spaces.empty()) throw DataError("sweep needs at least one embedding space");
  const bool transfer = std::any_of(tasks.begin(), tasks.end(),
                                    [](const EvalTask& t) { return t.test.has_value(); });

  EvalReport report;
  report.title = "power-mean sweep";
  for (const auto& t : tasks) report.tasks.push_back(t.train.name);
  for (const auto& ps : p_sets) {
    std::vector<PoolPart> src_parts, tgt_parts;
    for (const auto& sp : spaces) {
      src_parts.push_back({sp.source, ps});
      tgt_parts.push_back({sp.target ? sp.target : sp.source, ps});
    }
    const PooledConfig cfg_src(std::move(src_parts));
    const PooledConfig cfg_tgt(std::move(tgt_parts));
    std::vector<ReportCell> cells;
    for (const auto& t : tasks)
      cells.push_back(evaluate_cell(cfg_src, transfer ? &cfg_tgt : nullptr, t, options));
    report.rows.push_back(make_row("p=" + format_p_list(ps), cfg_src.output_dim(), std::move(cells)));
  }
  return report;
}

}  // namespace pmean

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

#ifndef PMEAN_EVAL_HARNESS_HPP
#define PMEAN_EVAL_HARNESS_HPP

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmean/classifier.hpp"
#include "pmean/pooling.hpp"
#include "pmean/report.hpp"
#include "pmean/znorm.hpp"

namespace pmean {

struct TaskItem {
  int label = 0;  // index into TaskDataset::classes
  std::string text;

  friend bool operator==(const TaskItem&, const TaskItem&) = default;
};

struct TaskDataset {
  std::string name;
  std::optional<std::string> language;
  std::vector<std::string> classes;
  std::vector<TaskItem> items;
  MetricKind metric = MetricKind::accuracy;

  std::vector<std::string> sentences() const;
  std::vector<int> labels() const;
  std::vector<std::size_t> class_counts() const;
  // Throws DataError: fewer than two classes, no items, or a bad label.
  void validate() const;

  friend bool operator==(const TaskDataset&, const TaskDataset&) = default;
};

// Task file: '#metric=accuracy|macro_f1' (required), '#name=...' and
// '#lang=...' header lines, then `label<TAB>sentence` lines. Classes are
// numbered in order of first appearance. See docs/formats.md.
TaskDataset read_task(std::istream& in, std::string default_name = {});
TaskDataset load_task(const std::filesystem::path& path);
std::string format_task(const TaskDataset& ds);

// Classes sorted by name and items sorted by (text, label), so that seeded
// subsampling cannot depend on file order.
TaskDataset canonicalize(const TaskDataset& ds);

// Source-language training task and target-language test task over the same
// class set. make_transfer_pair reorders the test classes to the training
// order and throws DataError when the sets differ.
struct TransferPair {
  TaskDataset train;
  TaskDataset test;
};
TransferPair make_transfer_pair(TaskDataset train, TaskDataset test);

struct EvalOptions {
  TrainProtocol protocol;
  EmbedOptions embed;
  // Fit z-normalization on each run's training part and apply it to the
  // corresponding test data.
  bool znorm = false;
};

EvalScore evaluate_monolingual(const PooledConfig& cfg, const TaskDataset& ds,
                               EvalOptions& options);

struct RunFit {
  SoftmaxModel model;
  std::optional<ZNormParams> znorm;
};

struct TransferResult {
  EvalScore cross;        // target-language test set, per run
  EvalScore in_language;  // identical to evaluate_monolingual on pair.train
  double drop = 0.0;      // in_language.mean - cross.mean
  // Fitted per run from source-language data only.
  std::vector<RunFit> fits;
};

// Throws DimensionError unless cfg_src and cfg_tgt have the same
// (dimension, p-values) structure part by part.
TransferResult evaluate_transfer(const PooledConfig& cfg_src, const PooledConfig& cfg_tgt,
                                 const TransferPair& pair, EvalOptions& options);

// One entry per embedding type. target is null for monolingual sweeps and
// required when any task is a transfer task.
struct SpacePair {
  std::shared_ptr<const EmbeddingSpace> source;
  std::shared_ptr<const EmbeddingSpace> target;
};

// A monolingual task, or a transfer task when `test` is set.
struct EvalTask {
  TaskDataset train;
  std::optional<TaskDataset> test;
};

// Cell for one task under the given configs (cfg_tgt only used for transfer).
ReportCell evaluate_cell(const PooledConfig& cfg_src, const PooledConfig* cfg_tgt,
                         const EvalTask& task, EvalOptions& options);

// One report row per p-set, every p-set applied to all spaces. Throws
// DataError for an empty task or p-set list.
EvalReport sweep_pmeans(const std::vector<SpacePair>& spaces,
                        const std::vector<std::vector<PValue>>& p_sets,
                        const std::vector<EvalTask>& tasks, EvalOptions& options);

}  // namespace pmean

#endif  // PMEAN_EVAL_HARNESS_HPP

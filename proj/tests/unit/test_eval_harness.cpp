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


#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pmean/error.hpp"
#include "pmean/eval_harness.hpp"

using namespace pmean;
using namespace pmean::testing;

namespace {

TaskDataset parse(const std::string& text, const std::string& name = "t") {
  std::istringstream in(text);
  return read_task(in, name);
}

int format_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

PooledConfig one_space(std::shared_ptr<const EmbeddingSpace> space, const char* ps) {
  return PooledConfig({PoolPart{std::move(space), parse_p_list(ps)}});
}

// Binary task whose only signal is a spike in the maximum of one dimension.
TaskDataset spike_task(const ComplementarityFixture& fx) {
  TaskDataset ds = fx.task;
  ds.name = "spike";
  ds.classes = {"flat", "spike"};
  for (TaskItem& item : ds.items) {
    const std::string& old = fx.task.classes[static_cast<std::size_t>(item.label)];
    item.label = old.find("spike") != std::string::npos ? 1 : 0;
  }
  return ds;
}

double three_sigma(double chance, std::size_t n) {
  return 3.0 * std::sqrt(chance * (1.0 - chance) / static_cast<double>(n));
}

EvalOptions quick_options(std::size_t runs = 5) {
  EvalOptions options;
  options.protocol.runs = runs;
  return options;
}

}  // namespace

TEST_CASE("task file with two labels") {
  const TaskDataset ds =
      parse("#metric=accuracy\n#name=polarity\npos\tgood film\nneg\tbad film\npos\tfun\nneg\tdull\n");
  CHECK(ds.name == "polarity");
  CHECK(ds.classes == std::vector<std::string>{"pos", "neg"});
  CHECK(ds.items.size() == 4);
  CHECK(ds.items[1] == TaskItem{1, "bad film"});
  CHECK(ds.class_counts() == std::vector<std::size_t>{2, 2});
  CHECK(ds.metric == MetricKind::accuracy);
  CHECK_FALSE(ds.language.has_value());
}

TEST_CASE("task file headers") {
  const TaskDataset ds = parse("#metric=macro_f1\n#lang=de\n# a comment\na\tx\r\n\nb\ty z\n", "stem");
  CHECK(ds.metric == MetricKind::macro_f1);
  CHECK(ds.language == "de");
  CHECK(ds.name == "stem");
  CHECK(ds.items[1].text == "y z");
}

TEST_CASE("task file errors") {
  CHECK(format_error_line("#metric=accuracy\na\tx\nb no tab\n") == 3);
  CHECK(format_error_line("#metric=f1\na\tx\nb\ty\n") == 1);
  CHECK(format_error_line("a\tx\nb\ty\n") == 1);
  CHECK(format_error_line("#metric=accuracy\na\tx\n#name=late\nb\ty\n") == 3);
  CHECK(format_error_line("#metric=accuracy\n\tx\nb\ty\n") == 2);
  CHECK_THROWS_AS(parse("#metric=accuracy\na\tx\na\ty\n"), DataError);
  CHECK_THROWS_AS(parse("#metric=accuracy\n"), DataError);
}

TEST_CASE("load_task names the dataset after the file") {
  TempDir dir;
  const TaskDataset ds = load_task(dir.write("sst2.task", "#metric=accuracy\na\tx\nb\ty\n"));
  CHECK(ds.name == "sst2");
  CHECK(parse(format_task(ds), "other") == ds);
  CHECK_THROWS_AS(load_task(dir / "missing.task"), Error);
}

TEST_CASE("canonical order") {
  const TaskDataset ds = parse("#metric=accuracy\nz\tb\na\ta\nz\ta\n");
  const TaskDataset c = canonicalize(ds);
  CHECK(c.classes == std::vector<std::string>{"a", "z"});
  CHECK(c.items == std::vector<TaskItem>{{0, "a"}, {1, "a"}, {1, "b"}});
}

TEST_CASE("max-signal task needs max pooling") {
  const ComplementarityFixture fx = complementarity_fixture(400, 21);
  const TaskDataset ds = spike_task(fx);
  EvalOptions options = quick_options(10);
  const EvalScore mean_only = evaluate_monolingual(one_space(fx.space_b, "1"), ds, options);
  const EvalScore with_max = evaluate_monolingual(one_space(fx.space_b, "1,inf"), ds, options);
  CHECK(std::abs(mean_only.mean - 0.5) <= three_sigma(0.5, 80));
  CHECK(with_max.mean >= 0.95);
}

TEST_CASE("shuffled labels score near chance") {
  const ComplementarityFixture fx = complementarity_fixture(400, 22);
  TaskDataset ds = spike_task(fx);
  std::mt19937_64 rng(23);
  std::vector<int> labels = ds.labels();
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < ds.items.size(); ++i) ds.items[i].label = labels[i];
  EvalOptions options = quick_options(10);
  const EvalScore s = evaluate_monolingual(one_space(fx.space_b, "1,inf"), ds, options);
  CHECK(std::abs(s.mean - 0.5) <= three_sigma(0.5, 80));
}

TEST_CASE("monolingual evaluation is deterministic and order-free") {
  const ComplementarityFixture fx = complementarity_fixture(120, 24);
  const PooledConfig cfg = one_space(fx.space_a, "1,inf");
  EvalOptions options = quick_options();
  options.znorm = true;
  const EvalScore a = evaluate_monolingual(cfg, fx.task, options);
  CHECK(a == evaluate_monolingual(cfg, fx.task, options));

  TaskDataset shuffled = fx.task;
  std::mt19937_64 rng(25);
  std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
  std::reverse(shuffled.classes.begin(), shuffled.classes.end());
  for (TaskItem& item : shuffled.items)
    item.label = static_cast<int>(shuffled.classes.size()) - 1 - item.label;
  CHECK(evaluate_monolingual(cfg, shuffled, options) == a);

  options.protocol.seed = 1;
  CHECK_FALSE(evaluate_monolingual(cfg, fx.task, options) == a);
}

TEST_CASE("z-norm fits on training rows only") {
  // One huge test-only value would dominate a global fit.
  const ComplementarityFixture fx = complementarity_fixture(100, 26, 100.0);
  const PooledConfig cfg({PoolPart{fx.space_a, parse_p_list("1")},
                          PoolPart{fx.space_b, parse_p_list("inf")}});
  EvalOptions off = quick_options(), on = quick_options();
  on.znorm = true;
  CHECK_FALSE(evaluate_monolingual(cfg, fx.task, off) == evaluate_monolingual(cfg, fx.task, on));
}

TEST_CASE("transfer pair alignment") {
  const TaskDataset en = parse("#metric=accuracy\npos\ta\nneg\tb\n");
  const TaskDataset de = parse("#metric=accuracy\nneg\tx\npos\ty\n");
  const TransferPair pair = make_transfer_pair(en, de);
  CHECK(pair.test.classes == en.classes);
  CHECK(pair.test.items[0] == TaskItem{1, "x"});
  CHECK_THROWS_AS(make_transfer_pair(en, parse("#metric=accuracy\npos\tx\nmeh\ty\n")), DataError);
}

TEST_CASE("transfer on a shared bilingual space") {
  const BilingualFixture fx = bilingual_fixture(200, 27);
  const PooledConfig cfg = one_space(fx.shared, "1,inf");
  EvalOptions options = quick_options();
  const TransferPair pair = make_transfer_pair(fx.train_en, fx.test_de);
  const TransferResult r = evaluate_transfer(cfg, cfg, pair, options);
  CHECK(r.drop == r.in_language.mean - r.cross.mean);
  CHECK(r.drop <= 0.02);
  CHECK(r.fits.size() == options.protocol.runs);
  CHECK(r.cross.per_run.size() == options.protocol.runs);
  CHECK(r.in_language == evaluate_monolingual(cfg, pair.train, options));
}

TEST_CASE("untrained projection transfers at chance") {
  const BilingualFixture fx = bilingual_fixture(400, 28);
  const ProjectionModel m = init_projection(16, 16, 16, 29);
  const PooledConfig src = one_space(
      std::make_shared<const EmbeddingSpace>(project_space(m, Side::source, *fx.source)), "1,inf");
  const PooledConfig tgt = one_space(
      std::make_shared<const EmbeddingSpace>(project_space(m, Side::target, *fx.target)), "1,inf");
  EvalOptions options = quick_options(10);
  const TransferResult r =
      evaluate_transfer(src, tgt, make_transfer_pair(fx.train_en, fx.test_de), options);
  CHECK(r.in_language.mean >= 0.9);
  CHECK(std::abs(r.cross.mean - 0.5) <= three_sigma(0.5, fx.test_de.items.size()));
}

TEST_CASE("property: target data never reaches the fitted parameters") {
  const BilingualFixture fx = bilingual_fixture(120, 30);
  const PooledConfig cfg = one_space(fx.shared, "1,inf");
  EvalOptions options = quick_options(4);
  options.znorm = true;
  const TransferPair pair = make_transfer_pair(fx.train_en, fx.test_de);
  const TransferResult base = evaluate_transfer(cfg, cfg, pair, options);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    TransferPair mutated = pair;
    for (TaskItem& item : mutated.test.items) {
      item.label = static_cast<int>(rng() % 2);
      if (rng() % 2) item.text = "de_w" + std::to_string(rng() % 50) + " " + item.text;
    }
    mutated.test.items.resize(mutated.test.items.size() - static_cast<std::size_t>(trial));
    const TransferResult r = evaluate_transfer(cfg, cfg, mutated, options);
    REQUIRE(r.fits.size() == base.fits.size());
    for (std::size_t i = 0; i < r.fits.size(); ++i) {
      CHECK(r.fits[i].model == base.fits[i].model);
      REQUIRE(r.fits[i].znorm.has_value());
      CHECK(r.fits[i].znorm->mean == base.fits[i].znorm->mean);
      CHECK(r.fits[i].znorm->std == base.fits[i].znorm->std);
    }
    CHECK(r.in_language == base.in_language);
  }
}

TEST_CASE("transfer rejects mismatched structure") {
  const BilingualFixture fx = bilingual_fixture(40, 32);
  const TransferPair pair = make_transfer_pair(fx.train_en, fx.test_de);
  EvalOptions options = quick_options(2);
  CHECK_THROWS_AS(evaluate_transfer(one_space(fx.shared, "1,inf"), one_space(fx.shared, "1"),
                                    pair, options),
                  DimensionError);
  CHECK_THROWS_AS(evaluate_transfer(one_space(fx.shared, "1,inf"), one_space(fx.shared, "inf,1"),
                                    pair, options),
                  DimensionError);
}

TEST_CASE("sweep structure") {
  const ComplementarityFixture fx = complementarity_fixture(80, 33);
  EvalOptions options = quick_options(2);
  const std::vector<SpacePair> spaces{{fx.space_a, nullptr}, {fx.space_b, nullptr}};
  const EvalReport r = sweep_pmeans(spaces, {parse_p_list("1,inf,-inf"), parse_p_list("1,inf,-inf,3")},
                                    {EvalTask{fx.task, std::nullopt}}, options);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].dim == 3 * 2 * 16);
  CHECK(r.rows[1].dim == 4 * 2 * 16);
  CHECK(r.rows[0].model == "p=1,inf,-inf");
  CHECK(r.rows[1].model == "p=1,inf,-inf,3");
  CHECK(r.tasks == std::vector<std::string>{fx.task.name});
  CHECK(r.rows[0].sigma == r.rows[0].cells[0].score);

  CHECK_THROWS_AS(sweep_pmeans(spaces, {parse_p_list("1")}, {}, options), DataError);
  CHECK_THROWS_AS(sweep_pmeans(spaces, {}, {EvalTask{fx.task, std::nullopt}}, options), DataError);
  CHECK_THROWS_AS(sweep_pmeans({}, {parse_p_list("1")}, {EvalTask{fx.task, std::nullopt}}, options),
                  DataError);
}

TEST_CASE("sweep over transfer tasks reports drops") {
  const BilingualFixture fx = bilingual_fixture(80, 34);
  EvalOptions options = quick_options(2);
  const EvalReport r = sweep_pmeans({{fx.shared, fx.shared}}, {parse_p_list("1"), parse_p_list("1,inf")},
                                    {EvalTask{fx.train_en, fx.test_de}}, options);
  REQUIRE(r.rows.size() == 2);
  for (const ReportRow& row : r.rows) {
    REQUIRE(row.cells[0].drop.has_value());
    CHECK(*row.cells[0].drop == *row.cells[0].in_language - row.cells[0].score);
    CHECK(row.sigma_drop.has_value());
  }
}

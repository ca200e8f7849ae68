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

#include "pmean/cli.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmean/config_file.hpp"
#include "pmean/error.hpp"
#include "pmean/eval_harness.hpp"
#include "pmean/parallel.hpp"
#include "pmean/projection.hpp"
#include "pmean/znorm.hpp"

namespace pmean::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("sha256 init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

// Flags shared by every command that embeds sentences.
struct EmbedFlags {
  bool strict = false;
  std::string oov = "skip";
  bool no_lowercase = false;

  void add(CLI::App* app) {
    app->add_flag("--strict", strict, "Fail (exit 3) where a power mean is undefined");
    app->add_option("--oov", oov, "Out-of-vocabulary policy")
        ->check(CLI::IsMember({"skip", "zero"}));
    app->add_flag("--no-lowercase", no_lowercase, "Keep token case");
  }

  EmbedOptions options() const {
    EmbedOptions o;
    o.tokenizer.lowercase = !no_lowercase;
    o.oov.mode = oov == "zero" ? OovMode::zero_vector : OovMode::skip;
    o.singularity.on_undefined = strict ? OnUndefined::error : OnUndefined::nan_to_zero;
    return o;
  }

  Json to_json() const {
    return Json{{"strict", strict}, {"oov", oov}, {"lowercase", !no_lowercase}};
  }
};

struct ProtocolFlags {
  std::size_t runs = 50;
  std::string lr_grid = "0.1,0.01,0.001,0.0001";
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  double l2 = 0.0;
  bool znorm = false;

  void add(CLI::App* app) {
    app->add_option("--runs", runs, "Random subsample runs")->check(CLI::PositiveNumber);
    app->add_option("--lr-grid", lr_grid, "Comma-separated learning rates");
    app->add_option("--epochs", epochs, "Classifier epochs per learning rate");
    app->add_option("--batch-size", batch_size, "Classifier minibatch size")
        ->check(CLI::PositiveNumber);
    app->add_option("--val-fraction", val_fraction, "Validation share for rate selection");
    app->add_option("--test-fraction", test_fraction, "Held-out share per run");
    app->add_option("--l2", l2, "L2 penalty on classifier weights");
    app->add_flag("--znorm", znorm, "z-normalize features (fit on training data)");
  }

  TrainProtocol protocol(std::uint64_t seed, unsigned threads) const {
    TrainProtocol p;
    p.lr_grid.clear();
    std::stringstream ss(lr_grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size())
        throw FormatError("invalid learning rate '" + item + "'");
      p.lr_grid.push_back(v);
    }
    p.runs = runs;
    p.max_epochs = epochs;
    p.batch_size = batch_size;
    p.val_fraction = val_fraction;
    p.test_fraction = test_fraction;
    p.l2 = l2;
    p.seed = seed;
    p.threads = threads;
    p.validate();
    return p;
  }

  Json to_json() const {
    return Json{{"runs", runs},         {"lr_grid", lr_grid},
                {"epochs", epochs},     {"batch_size", batch_size},
                {"val_fraction", val_fraction}, {"test_fraction", test_fraction},
                {"l2", l2},             {"znorm", znorm}};
  }
};

struct Manifest {
  Json doc;

  explicit Manifest(const std::string& command) {
    doc["tool"] = "pmean";
    doc["tool_version"] = std::string(kToolVersion);
    doc["command"] = command;
    doc["config"] = Json::object();
    doc["seeds"] = Json::object();
    doc["inputs"] = Json::array();
  }

  void input(const fs::path& p) {
    doc["inputs"].push_back(Json{{"path", p.string()}, {"sha256", sha256_file(p)}});
  }

  void config_inputs(const std::vector<ConfigEntry>& entries, const fs::path& base) {
    for (const auto& e : entries)
      if (e.path) {
        fs::path p(*e.path);
        if (p.is_relative()) p = base / p;
        input(p);
      }
  }

  std::string dump() const { return doc.dump(2) + "\n"; }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PMEAN_SEED"); env && *env) {
    std::uint64_t v = 0;
    std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw FormatError("PMEAN_SEED is not an unsigned integer: '" + std::string(s) + "'");
    return v;
  }
  return 0;
}

struct LoadedConfig {
  std::vector<ConfigEntry> entries;
  fs::path base;
  PooledConfig config;
};

LoadedConfig load_config(const fs::path& path, SpaceCache& cache) {
  LoadedConfig lc;
  lc.entries = read_config_file(path);
  lc.base = path.parent_path();
  lc.config = resolve_config(lc.entries, lc.base, cache);
  return lc;
}

void write_report(const fs::path& prefix, const EvalReport& report, Manifest& manifest,
                  std::ostream& out) {
  const fs::path json_path = with_suffix(prefix, ".json");
  const fs::path md_path = with_suffix(prefix, ".md");
  const fs::path manifest_path = with_suffix(prefix, ".manifest.json");
  manifest.doc["outputs"] = Json::array({json_path.string(), md_path.string()});
  const std::string json = emit_report(report, ReportFormat::json);
  const std::string md = emit_report(report, ReportFormat::markdown);
  write_file_atomic(json_path, json);
  write_file_atomic(md_path, md);
  write_file_atomic(manifest_path, manifest.dump());
  out << md;
}

// Pairs `--train a --test b` options positionally.
std::vector<EvalTask> transfer_tasks(const std::vector<std::string>& train,
                                     const std::vector<std::string>& test, Manifest& manifest) {
  if (train.size() != test.size())
    throw FormatError("--train and --test must be given the same number of times");
  std::vector<EvalTask> tasks;
  for (std::size_t i = 0; i < train.size(); ++i) {
    manifest.input(train[i]);
    manifest.input(test[i]);
    tasks.push_back({load_task(train[i]), load_task(test[i])});
  }
  return tasks;
}

int cmd_embed(const std::string& config_path, const std::string& input_path,
              const std::string& output_path, bool znorm, const EmbedFlags& flags,
              unsigned threads, std::ostream& out) {
  SpaceCache cache;
  const LoadedConfig lc = load_config(config_path, cache);
  const std::vector<std::string> sentences = read_lines(input_path);

  Manifest manifest("embed");
  manifest.doc["config"] = Json{{"pooled_config", format_config(lc.entries)},
                                {"output_dim", lc.config.output_dim()},
                                {"znorm", znorm},
                                {"embedding", flags.to_json()}};
  manifest.input(config_path);
  manifest.config_inputs(lc.entries, lc.base);
  manifest.input(input_path);

  EmbedOptions options = flags.options();
  PoolingStats stats;
  Matrix x = embed_corpus(lc.config, sentences, options, threads, &stats);
  if (znorm && x.rows() > 0) {
    const ZNormParams params = znorm_fit(x);
    x = znorm_apply(params, x);
    manifest.doc["znorm"] = Json{{"mean", std::vector<double>(params.mean.begin(), params.mean.end())},
                                 {"std", std::vector<double>(params.std.begin(), params.std.end())},
                                 {"floor", params.floor}};
  }
  manifest.doc["stats"] = Json{{"sentences", sentences.size()},
                               {"undefined_replaced", stats.undefined},
                               {"oov_tokens", stats.oov_tokens},
                               {"fallback_rows", stats.fallbacks}};

  std::string text;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) text += '\t';
      text += format_double(x(i, j));
    }
    text += '\n';
  }
  write_file_atomic(output_path, text);
  write_file_atomic(with_suffix(output_path, ".manifest.json"), manifest.dump());
  out << "embedded " << x.rows() << " sentences, dim " << x.cols() << "\n";
  return kExitOk;
}

struct TrainFlags {
  std::string corpus, source_emb, target_emb, output, loss_csv;
  Index dim = 300;
  double margin = 0.5;
  double dropout = 0.5;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::optional<std::uint64_t> seed;
};

int cmd_train_projection(const TrainFlags& f, const EmbedFlags& flags, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(f.seed);
  const auto src = std::make_shared<const EmbeddingSpace>(
      load_text_embeddings(f.source_emb, {}, "source").space);
  const auto tgt = std::make_shared<const EmbeddingSpace>(
      load_text_embeddings(f.target_emb, {}, "target").space);
  const std::vector<std::string> lines = read_lines(f.corpus);

  EmbedOptions options = flags.options();
  const PooledConfig src_cfg(std::vector<PoolPart>{PoolPart{src, {PValue(1.0)}}});
  const PooledConfig tgt_cfg(std::vector<PoolPart>{PoolPart{tgt, {PValue(1.0)}}});
  std::vector<std::string> src_sentences, tgt_sentences;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos)
      throw FormatError("expected 'source<TAB>target'", i + 1);
    src_sentences.push_back(lines[i].substr(0, tab));
    tgt_sentences.push_back(lines[i].substr(tab + 1));
  }
  ParallelCorpus corpus;
  corpus.source = embed_corpus(src_cfg, src_sentences, options);
  corpus.target = embed_corpus(tgt_cfg, tgt_sentences, options);

  ProjectionTrainConfig cfg;
  cfg.shared_dim = f.dim;
  cfg.margin = f.margin;
  cfg.dropout_rate = f.dropout;
  cfg.max_epochs = f.epochs;
  cfg.batch_size = f.batch_size;
  cfg.adam.step_size = f.lr;
  cfg.seed = seed;
  const ProjectionTrainResult result = train_projection(corpus, cfg);

  const fs::path loss_path = f.loss_csv.empty() ? with_suffix(f.output, ".loss.csv")
                                                : fs::path(f.loss_csv);
  std::string csv = "epoch,loss,dropout_loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e)
    csv += std::to_string(e + 1) + "," + format_double(result.loss_history[e]) + "," +
           format_double(result.dropout_loss_history[e]) + "\n";

  Manifest manifest("train-projection");
  manifest.doc["config"] = Json{{"shared_dim", cfg.shared_dim},     {"margin", cfg.margin},
                                {"dropout", cfg.dropout_rate},      {"epochs", cfg.max_epochs},
                                {"batch_size", cfg.batch_size},     {"lr", cfg.adam.step_size},
                                {"beta1", cfg.adam.beta1},          {"beta2", cfg.adam.beta2},
                                {"adam_epsilon", cfg.adam.epsilon}, {"embedding", flags.to_json()}};
  manifest.doc["seeds"] = Json{{"seed", seed}};
  manifest.input(f.corpus);
  manifest.input(f.source_emb);
  manifest.input(f.target_emb);
  manifest.doc["outputs"] = Json::array({f.output, loss_path.string()});

  write_file_atomic(f.output, projection_to_json(result.model));
  write_file_atomic(loss_path, csv);
  write_file_atomic(with_suffix(f.output, ".manifest.json"), manifest.dump());
  out << "trained projection on " << corpus.size() << " pairs for "
      << result.loss_history.size() << " epochs";
  if (!result.loss_history.empty()) out << ", final loss " << result.loss_history.back();
  out << "\n";
  return kExitOk;
}

int cmd_project_space(const std::string& model_path, const std::string& side,
                      const std::string& input, const std::string& output, std::ostream& out) {
  const ProjectionModel model = projection_from_json(read_file(model_path));
  const Side s = side == "source" ? Side::source : Side::target;
  const EmbeddingSpace space = load_text_embeddings(input).space;
  const EmbeddingSpace projected = project_space(model, s, space);
  std::ostringstream text;
  write_text_embeddings(projected, text);
  write_file_atomic(output, text.str());
  out << "projected " << projected.size() << " words to dim " << projected.dim() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concatenated power-mean sentence embeddings and evaluation", "pmean"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  // embed
  auto* embed = app.add_subcommand("embed", "Embed sentences with a pooled config");
  std::string embed_config, embed_input, embed_output;
  bool embed_znorm = false;
  EmbedFlags embed_flags;
  embed->add_option("--config", embed_config, "Pooled config file")->required();
  embed->add_option("--input", embed_input, "Sentences, one per line")->required();
  embed->add_option("--output", embed_output, "Output matrix (TSV)")->required();
  embed->add_flag("--znorm", embed_znorm, "z-normalize columns over the input");
  embed_flags.add(embed);

  // train-projection
  auto* train = app.add_subcommand("train-projection", "Train a bilingual tanh projection");
  TrainFlags tf;
  EmbedFlags train_flags;
  train->add_option("--corpus", tf.corpus, "Parallel sentences: source<TAB>target")->required();
  train->add_option("--source-emb", tf.source_emb, "Source-language embeddings")->required();
  train->add_option("--target-emb", tf.target_emb, "Target-language embeddings")->required();
  train->add_option("--output", tf.output, "Model JSON path")->required();
  train->add_option("--loss-csv", tf.loss_csv, "Per-epoch loss CSV (default <output>.loss.csv)");
  train->add_option("--dim", tf.dim, "Shared space dimension")->check(CLI::PositiveNumber);
  train->add_option("--margin", tf.margin, "Hinge margin");
  train->add_option("--dropout", tf.dropout, "Input dropout rate")->check(CLI::Range(0.0, 0.999));
  train->add_option("--epochs", tf.epochs, "Training epochs");
  train->add_option("--batch-size", tf.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", tf.lr, "Adam step size")->check(CLI::PositiveNumber);
  train->add_option("--seed", tf.seed, "Random seed (default $PMEAN_SEED or 0)");
  train_flags.add(train);

  // project-space
  auto* proj = app.add_subcommand("project-space", "Map a word-embedding file through a model");
  std::string proj_model, proj_side = "source", proj_input, proj_output;
  proj->add_option("--model", proj_model, "Model JSON")->required();
  proj->add_option("--side", proj_side, "Which map to apply")
      ->check(CLI::IsMember({"source", "target"}));
  proj->add_option("--input", proj_input, "Embedding file")->required();
  proj->add_option("--output", proj_output, "Projected embedding file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Monolingual evaluation of a pooled config");
  std::string eval_config, eval_output;
  std::vector<std::string> eval_tasks;
  std::optional<std::uint64_t> eval_seed;
  ProtocolFlags eval_protocol;
  EmbedFlags eval_flags;
  eval->add_option("--config", eval_config, "Pooled config file")->required();
  eval->add_option("--task", eval_tasks, "Task file (repeatable)")->required();
  eval->add_option("--output", eval_output, "Report prefix")->required();
  eval->add_option("--seed", eval_seed, "Random seed (default $PMEAN_SEED or 0)");
  eval_protocol.add(eval);
  eval_flags.add(eval);

  // eval-transfer
  auto* xfer = app.add_subcommand("eval-transfer", "Train on source language, test on target");
  std::string xfer_src, xfer_tgt, xfer_output;
  std::vector<std::string> xfer_train, xfer_test;
  std::optional<std::uint64_t> xfer_seed;
  ProtocolFlags xfer_protocol;
  EmbedFlags xfer_flags;
  xfer->add_option("--config-src", xfer_src, "Source-language pooled config")->required();
  xfer->add_option("--config-tgt", xfer_tgt, "Target-language pooled config")->required();
  xfer->add_option("--train", xfer_train, "Source task file (repeatable)")->required();
  xfer->add_option("--test", xfer_test, "Target task file, paired with --train")->required();
  xfer->add_option("--output", xfer_output, "Report prefix")->required();
  xfer->add_option("--seed", xfer_seed, "Random seed (default $PMEAN_SEED or 0)");
  xfer_protocol.add(xfer);
  xfer_flags.add(xfer);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Evaluate several p-sets over the same spaces");
  std::string sweep_config, sweep_config_tgt, sweep_output;
  std::vector<std::string> sweep_psets, sweep_tasks, sweep_train, sweep_test;
  std::optional<std::uint64_t> sweep_seed;
  ProtocolFlags sweep_protocol;
  EmbedFlags sweep_flags;
  sweep->add_option("--config", sweep_config, "Config naming the spaces (p-values ignored)")
      ->required();
  sweep->add_option("--config-tgt", sweep_config_tgt, "Target-language spaces for transfer");
  sweep->add_option("--p-set", sweep_psets, "Comma-separated p-values (repeatable)")->required();
  sweep->add_option("--task", sweep_tasks, "Monolingual task file (repeatable)");
  sweep->add_option("--train", sweep_train, "Transfer source task (repeatable)");
  sweep->add_option("--test", sweep_test, "Transfer target task, paired with --train");
  sweep->add_option("--output", sweep_output, "Report prefix")->required();
  sweep->add_option("--seed", sweep_seed, "Random seed (default $PMEAN_SEED or 0)");
  sweep_protocol.add(sweep);
  sweep_flags.add(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*embed)
      return cmd_embed(embed_config, embed_input, embed_output, embed_znorm, embed_flags, threads,
                       out);
    if (*train) return cmd_train_projection(tf, train_flags, out);
    if (*proj) return cmd_project_space(proj_model, proj_side, proj_input, proj_output, out);

    if (*eval) {
      const std::uint64_t seed = resolve_seed(eval_seed);
      SpaceCache cache;
      const LoadedConfig lc = load_config(eval_config, cache);
      EvalOptions options;
      options.protocol = eval_protocol.protocol(seed, threads);
      options.embed = eval_flags.options();
      options.znorm = eval_protocol.znorm;

      Manifest manifest("eval");
      manifest.doc["config"] = Json{{"pooled_config", format_config(lc.entries)},
                                    {"protocol", eval_protocol.to_json()},
                                    {"embedding", eval_flags.to_json()}};
      manifest.doc["seeds"] = Json{{"seed", seed}};
      manifest.input(eval_config);
      manifest.config_inputs(lc.entries, lc.base);

      EvalReport report;
      report.title = "monolingual evaluation";
      std::vector<ReportCell> cells;
      for (const auto& path : eval_tasks) {
        manifest.input(path);
        const EvalTask task{load_task(path), std::nullopt};
        report.tasks.push_back(task.train.name);
        cells.push_back(evaluate_cell(lc.config, nullptr, task, options));
      }
      report.rows.push_back(
          make_row(lc.config.describe(), lc.config.output_dim(), std::move(cells)));
      write_report(eval_output, report, manifest, out);
      return kExitOk;
    }

    if (*xfer) {
      const std::uint64_t seed = resolve_seed(xfer_seed);
      SpaceCache cache;
      const LoadedConfig src = load_config(xfer_src, cache);
      const LoadedConfig tgt = load_config(xfer_tgt, cache);
      EvalOptions options;
      options.protocol = xfer_protocol.protocol(seed, threads);
      options.embed = xfer_flags.options();
      options.znorm = xfer_protocol.znorm;

      Manifest manifest("eval-transfer");
      manifest.doc["config"] = Json{{"pooled_config_src", format_config(src.entries)},
                                    {"pooled_config_tgt", format_config(tgt.entries)},
                                    {"protocol", xfer_protocol.to_json()},
                                    {"embedding", xfer_flags.to_json()}};
      manifest.doc["seeds"] = Json{{"seed", seed}};
      manifest.input(xfer_src);
      manifest.config_inputs(src.entries, src.base);
      manifest.input(xfer_tgt);
      manifest.config_inputs(tgt.entries, tgt.base);

      const auto tasks = transfer_tasks(xfer_train, xfer_test, manifest);
      EvalReport report;
      report.title = "cross-lingual transfer";
      std::vector<ReportCell> cells;
      for (const auto& task : tasks) {
        report.tasks.push_back(task.train.name);
        cells.push_back(evaluate_cell(src.config, &tgt.config, task, options));
      }
      report.rows.push_back(
          make_row(src.config.describe(), src.config.output_dim(), std::move(cells)));
      write_report(xfer_output, report, manifest, out);
      return kExitOk;
    }

    if (*sweep) {
      const std::uint64_t seed = resolve_seed(sweep_seed);
      SpaceCache cache;
      const LoadedConfig src = load_config(sweep_config, cache);
      std::optional<LoadedConfig> tgt;
      if (!sweep_config_tgt.empty()) tgt = load_config(sweep_config_tgt, cache);
      if (!sweep_train.empty() && !tgt)
        throw FormatError("transfer sweep (--train/--test) needs --config-tgt");
      if (tgt && tgt->config.parts().size() != src.config.parts().size())
        throw DimensionError("--config and --config-tgt name different numbers of spaces");

      EvalOptions options;
      options.protocol = sweep_protocol.protocol(seed, threads);
      options.embed = sweep_flags.options();
      options.znorm = sweep_protocol.znorm;

      Manifest manifest("sweep");
      Json psets = Json::array();
      std::vector<std::vector<PValue>> p_sets;
      for (const auto& s : sweep_psets) {
        p_sets.push_back(parse_p_list(s));
        psets.push_back(format_p_list(p_sets.back()));
      }
      manifest.doc["config"] = Json{{"pooled_config", format_config(src.entries)},
                                    {"pooled_config_tgt", tgt ? format_config(tgt->entries) : ""},
                                    {"p_sets", psets},
                                    {"protocol", sweep_protocol.to_json()},
                                    {"embedding", sweep_flags.to_json()}};
      manifest.doc["seeds"] = Json{{"seed", seed}};
      manifest.input(sweep_config);
      manifest.config_inputs(src.entries, src.base);
      if (tgt) {
        manifest.input(sweep_config_tgt);
        manifest.config_inputs(tgt->entries, tgt->base);
      }

      std::vector<EvalTask> tasks;
      for (const auto& path : sweep_tasks) {
        manifest.input(path);
        tasks.push_back({load_task(path), std::nullopt});
      }
      for (auto& t : transfer_tasks(sweep_train, sweep_test, manifest)) tasks.push_back(std::move(t));

      std::vector<SpacePair> spaces;
      for (std::size_t i = 0; i < src.config.parts().size(); ++i)
        spaces.push_back({src.config.parts()[i].space,
                          tgt ? tgt->config.parts()[i].space : nullptr});
      const EvalReport report = sweep_pmeans(spaces, p_sets, tasks, options);
      write_report(sweep_output, report, manifest, out);
      return kExitOk;
    }
  } catch (const NumericalPolicyError& e) {
    err << "pmean: numerical policy error: " << e.what() << "\n";
    return kExitNumericalPolicy;
  } catch (const Error& e) {
    err << "pmean: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "pmean: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pmean::cli

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

#include "pmean/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmean/error.hpp"
#include "pmean/parallel.hpp"

namespace pmean {

std::string_view to_string(MetricKind kind) {
  return kind == MetricKind::accuracy ? "accuracy" : "macro_f1";
}

MetricKind parse_metric(std::string_view text) {
  if (text == "accuracy") return MetricKind::accuracy;
  if (text == "macro_f1") return MetricKind::macro_f1;
  throw FormatError("unknown metric '" + std::string(text) + "' (accuracy|macro_f1)");
}

double metric_score(std::span<const int> y_true, std::span<const int> y_pred,
                    std::size_t num_classes, MetricKind kind) {
  if (y_true.size() != y_pred.size())
    throw DimensionError("metric: " + std::to_string(y_true.size()) + " labels but " +
                         std::to_string(y_pred.size()) + " predictions");
  if (y_true.empty()) throw DimensionError("metric over zero samples");

  if (kind == MetricKind::accuracy) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];
    return static_cast<double>(correct) / static_cast<double>(y_true.size());
  }

  std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true[i]);
    const auto p = static_cast<std::size_t>(y_pred[i]);
    if (t >= num_classes || p >= num_classes)
      throw DataError("metric: label outside the class set");
    if (t == p) {
      ++tp[t];
    } else {
      ++fn[t];
      ++fp[p];
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    if (denom > 0) sum += 2.0 * static_cast<double>(tp[c]) / denom;
  }
  return sum / static_cast<double>(num_classes);
}

Matrix SoftmaxModel::logits(const Matrix& x) const {
  if (x.cols() != input_dim())
    throw DimensionError("classifier expects " + std::to_string(input_dim()) +
                         " features, got " + std::to_string(x.cols()));
  return (x * weights.transpose()).rowwise() + bias.transpose();
}

std::vector<int> SoftmaxModel::predict(const Matrix& x) const {
  const Matrix z = logits(x);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Index i = 0; i < z.rows(); ++i) {
    Index best = 0;
    z.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

XentResult softmax_xent(const SoftmaxModel& model, const Matrix& x, std::span<const int> y,
                        double l2) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("softmax_xent: " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
  if (x.rows() == 0) throw DimensionError("softmax_xent over zero samples");
  const Index n = x.rows();
  const Index c = model.num_classes();
  Matrix z = model.logits(x);
  XentResult out;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    if (label < 0 || label >= c)
      throw DataError("softmax_xent: label " + std::to_string(label) + " outside [0, " +
                      std::to_string(c) + ")");
    auto row = z.row(i);
    row.array() -= row.maxCoeff();
    const double shifted = row(label);
    row = row.array().exp().matrix();
    const double norm = row.sum();
    total += std::log(norm) - shifted;
    row /= norm;
    row(label) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  z *= inv_n;
  out.loss = total * inv_n;
  out.grad_weights = z.transpose() * x;
  out.grad_bias = z.colwise().sum().transpose();
  if (l2 > 0.0) {
    out.loss += 0.5 * l2 * model.weights.squaredNorm();
    out.grad_weights += l2 * model.weights;
  }
  return out;
}

void TrainProtocol::validate() const {
  if (lr_grid.empty()) throw DataError("learning-rate grid is empty");
  for (double lr : lr_grid)
    if (!(lr > 0.0) || !std::isfinite(lr)) throw DataError("learning rates must be positive");
  if (batch_size < 1) throw DataError("batch size must be positive");
  if (runs < 1) throw DataError("runs must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw DataError("val_fraction must be in (0, 1)");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DataError("test_fraction must be in (0, 1)");
  if (l2 < 0.0) throw DataError("l2 must be non-negative");
  if (init_scale < 0.0) throw DataError("init_scale must be non-negative");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Matrix gather_rows(const Matrix& x, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<int> gather(std::span<const int> y, std::span<const Index> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[static_cast<std::size_t>(rows[i])];
  return out;
}

namespace {

std::span<double> flat(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> flat(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> flat(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> flat(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::size_t count_classes(std::span<const int> y, std::size_t num_classes) {
  std::vector<bool> present(num_classes);
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
      throw DataError("label " + std::to_string(label) + " outside the class set");
    present[static_cast<std::size_t>(label)] = true;
  }
  return static_cast<std::size_t>(std::count(present.begin(), present.end(), true));
}

}  // namespace

TrainedSoftmax train_softmax(const Matrix& x, std::span<const int> y,
                             const std::vector<std::string>& class_labels,
                             double learning_rate, const TrainProtocol& protocol,
                             std::uint64_t seed) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("train_softmax: rows and labels differ in count");
  if (x.rows() == 0) throw DataError("train_softmax: no samples");
  const auto c = static_cast<Index>(class_labels.size());
  if (c < 2) throw DataError("classifier needs at least two classes");

  std::mt19937_64 rng(seed);
  TrainedSoftmax out;
  SoftmaxModel& model = out.model;
  model.class_labels = class_labels;
  model.weights.resize(c, x.cols());
  std::normal_distribution<double> init(0.0, 1.0);
  for (Index i = 0; i < model.weights.size(); ++i)
    model.weights.data()[i] = protocol.init_scale * init(rng);
  model.bias = Vector::Zero(c);

  AdamConfig adam = protocol.adam;
  adam.step_size = learning_rate;
  AdamState state_w, state_b;
  long step = 0;

  const std::size_t n = y.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  for (std::size_t epoch = 0; epoch < protocol.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += protocol.batch_size) {
      const std::size_t end = std::min(n, start + protocol.batch_size);
      std::span<const Index> batch(order.data() + start, end - start);
      const Matrix xb = gather_rows(x, batch);
      const std::vector<int> yb = gather(y, batch);
      const XentResult g = softmax_xent(model, xb, yb, protocol.l2);
      ++step;
      adam_step(flat(model.weights), flat(g.grad_weights), state_w, adam, step);
      adam_step(flat(model.bias), flat(g.grad_bias), state_b, adam, step);
    }
    out.epoch_losses.push_back(softmax_xent(model, x, y, protocol.l2).loss);
  }
  return out;
}

Split stratified_split(std::span<const int> y, const std::vector<std::string>& class_labels,
                       double test_fraction, std::mt19937_64& rng) {
  std::vector<std::vector<Index>> members(class_labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int label = y[i];
    if (label < 0 || static_cast<std::size_t>(label) >= class_labels.size())
      throw DataError("label " + std::to_string(label) + " outside the class set");
    members[static_cast<std::size_t>(label)].push_back(static_cast<Index>(i));
  }
  Split split;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    if (m.empty()) continue;
    if (m.size() < 2)
      throw DataError("class '" + class_labels[c] +
                      "' has a single example; cannot place it in both train and test");
    std::shuffle(m.begin(), m.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(m.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, m.size() - 1);
    split.test.insert(split.test.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), m.begin() + static_cast<std::ptrdiff_t>(n_test), m.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

FitResult fit(const Matrix& x, std::span<const int> y,
              const std::vector<std::string>& class_labels, MetricKind metric,
              const TrainProtocol& protocol, std::uint64_t seed) {
  protocol.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("fit: rows and labels differ in count");
  if (count_classes(y, class_labels.size()) < 2)
    throw DataError("fit needs at least two classes present in the labels");

  // Validation split; classes too small to split stay in training.
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::vector<std::vector<Index>> members(class_labels.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    members[static_cast<std::size_t>(y[i])].push_back(static_cast<Index>(i));
  std::vector<Index> train_idx, val_idx;
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng);
    std::size_t n_val = 0;
    if (m.size() >= 2)
      n_val = std::min<std::size_t>(
          m.size() - 1,
          static_cast<std::size_t>(std::llround(protocol.val_fraction * static_cast<double>(m.size()))));
    val_idx.insert(val_idx.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.insert(train_idx.end(), m.begin() + static_cast<std::ptrdiff_t>(n_val), m.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  if (val_idx.empty()) val_idx = train_idx;

  const Matrix x_train = gather_rows(x, train_idx);
  const std::vector<int> y_train = gather(y, train_idx);
  const Matrix x_val = gather_rows(x, val_idx);
  const std::vector<int> y_val = gather(y, val_idx);

  std::vector<double> grid = protocol.lr_grid;
  std::sort(grid.begin(), grid.end());
  FitResult best;
  double best_loss = 0.0;
  bool have = false;
  const std::uint64_t train_seed = derive_seed(seed, 1);
  for (double lr : grid) {
    TrainedSoftmax trained =
        train_softmax(x_train, y_train, class_labels, lr, protocol, train_seed);
    const double score =
        metric_score(y_val, trained.model.predict(x_val), class_labels.size(), metric);
    const double loss = softmax_xent(trained.model, x_val, y_val).loss;
    // Ties on the metric go to the lower validation loss, then (strictly
    // better only) to the smaller rate.
    if (!have || score > best.validation_score ||
        (score == best.validation_score && loss < best_loss)) {
      best.model = std::move(trained.model);
      best.learning_rate = lr;
      best.validation_score = score;
      best_loss = loss;
      have = true;
    }
  }
  return best;
}

EvalScore EvalScore::from_runs(MetricKind metric, std::vector<double> per_run) {
  EvalScore s;
  s.metric = metric;
  s.per_run = std::move(per_run);
  if (s.per_run.empty()) return s;
  const double n = static_cast<double>(s.per_run.size());
  s.mean = std::accumulate(s.per_run.begin(), s.per_run.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.per_run) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

std::uint64_t run_split_seed(std::uint64_t seed, std::size_t run) {
  return derive_seed(seed, run, 1);
}

std::uint64_t run_fit_seed(std::uint64_t seed, std::size_t run) {
  return derive_seed(seed, run, 2);
}

EvalScore subsample_validate(const Matrix& x, std::span<const int> y,
                             const std::vector<std::string>& class_labels, MetricKind metric,
                             const TrainProtocol& protocol, const FeatureTransform& transform) {
  protocol.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("subsample_validate: rows and labels differ in count");
  if (count_classes(y, class_labels.size()) < 2)
    throw DataError("subsample validation needs at least two classes");

  std::vector<double> scores(protocol.runs);
  parallel_for(protocol.runs, protocol.threads, [&](std::size_t r) {
    std::mt19937_64 rng(run_split_seed(protocol.seed, r));
    const Split split = stratified_split(y, class_labels, protocol.test_fraction, rng);
    Matrix x_train = gather_rows(x, split.train);
    Matrix x_test = gather_rows(x, split.test);
    if (transform) transform(x_train, x_test);
    const std::vector<int> y_train = gather(y, split.train);
    const std::vector<int> y_test = gather(y, split.test);
    TrainProtocol inner = protocol;
    inner.threads = 1;
    const FitResult fitted =
        fit(x_train, y_train, class_labels, metric, inner, run_fit_seed(protocol.seed, r));
    scores[r] =
        metric_score(y_test, fitted.model.predict(x_test), class_labels.size(), metric);
  });
  return EvalScore::from_runs(metric, std::move(scores));
}

}  // namespace pmean

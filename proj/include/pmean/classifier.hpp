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

#ifndef PMEAN_CLASSIFIER_HPP
#define PMEAN_CLASSIFIER_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmean/adam.hpp"
#include "pmean/types.hpp"

namespace pmean {

enum class MetricKind { accuracy, macro_f1 };

std::string_view to_string(MetricKind kind);
// Accepts "accuracy" and "macro_f1". Throws FormatError.
MetricKind parse_metric(std::string_view text);

// Accuracy, or the unweighted mean over all num_classes classes of per-class
// F1 = 2tp / (2tp + fp + fn), where a class with no true and no predicted
// instances scores 0. Throws DimensionError on unequal or empty inputs.
double metric_score(std::span<const int> y_true, std::span<const int> y_pred,
                    std::size_t num_classes, MetricKind kind);

// Multiclass logistic regression. Labels are indices into class_labels.
struct SoftmaxModel {
  Matrix weights;  // C x D
  Vector bias;     // C
  std::vector<std::string> class_labels;

  Index num_classes() const { return weights.rows(); }
  Index input_dim() const { return weights.cols(); }
  Matrix logits(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;

  friend bool operator==(const SoftmaxModel& a, const SoftmaxModel& b) {
    return a.weights == b.weights && a.bias == b.bias && a.class_labels == b.class_labels;
  }
};

struct XentResult {
  double loss = 0.0;  // mean cross-entropy (+ l2/2 |W|^2)
  Matrix grad_weights;
  Vector grad_bias;
};

// Max-subtracted softmax cross-entropy and its exact gradient. Throws
// DataError for labels outside [0, C) and DimensionError on shape mismatch.
XentResult softmax_xent(const SoftmaxModel& model, const Matrix& x, std::span<const int> y,
                        double l2 = 0.0);

struct TrainProtocol {
  std::vector<double> lr_grid{1e-1, 1e-2, 1e-3, 1e-4};
  std::size_t batch_size = 32;
  std::size_t max_epochs = 20;
  std::size_t runs = 50;
  // Share of each training set held out for learning-rate selection.
  double val_fraction = 0.1;
  // Share of the data held out for scoring in each subsample run.
  double test_fraction = 0.2;
  double l2 = 0.0;
  // Standard deviation of the random weight initialization.
  double init_scale = 0.01;
  AdamConfig adam;  // step_size is replaced by each grid entry
  std::uint64_t seed = 0;
  // Runs execute on up to this many threads; results do not depend on it.
  unsigned threads = 1;

  // Throws DataError when a field is out of range.
  void validate() const;
};

// Deterministic child seed for run / stream indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

struct TrainedSoftmax {
  SoftmaxModel model;
  // Full-data training loss after each epoch.
  std::vector<double> epoch_losses;
};

// Minibatch Adam at a fixed step size for protocol.max_epochs epochs.
TrainedSoftmax train_softmax(const Matrix& x, std::span<const int> y,
                             const std::vector<std::string>& class_labels,
                             double learning_rate, const TrainProtocol& protocol,
                             std::uint64_t seed);

struct FitResult {
  SoftmaxModel model;
  double learning_rate = 0.0;
  double validation_score = 0.0;
};

// Splits off protocol.val_fraction, trains one model per grid learning rate
// and returns the one with the best validation score. Ties go to the lower
// validation cross-entropy, then to the smaller rate.
// Throws DataError when fewer than two classes are present.
FitResult fit(const Matrix& x, std::span<const int> y,
              const std::vector<std::string>& class_labels, MetricKind metric,
              const TrainProtocol& protocol, std::uint64_t seed);

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

// Per class, shuffles its members and sends round(test_fraction * n_c) of
// them to test, at least 1 and at most n_c - 1. Throws DataError naming the
// first class with fewer than two members.
Split stratified_split(std::span<const int> y, const std::vector<std::string>& class_labels,
                       double test_fraction, std::mt19937_64& rng);

struct EvalScore {
  MetricKind metric = MetricKind::accuracy;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
  std::vector<double> per_run;

  static EvalScore from_runs(MetricKind metric, std::vector<double> per_run);
  friend bool operator==(const EvalScore&, const EvalScore&) = default;
};

// Hook applied to each run's features after the split, e.g. z-normalization
// fitted on the training part.
using FeatureTransform = std::function<void(Matrix& train, Matrix& test)>;

// Rows of x gathered by index.
Matrix gather_rows(const Matrix& x, std::span<const Index> rows);
std::vector<int> gather(std::span<const int> y, std::span<const Index> rows);

// Seeds of subsample run r: split stream and fit stream.
std::uint64_t run_split_seed(std::uint64_t seed, std::size_t run);
std::uint64_t run_fit_seed(std::uint64_t seed, std::size_t run);

// protocol.runs random stratified train/test subsamples; each run fits on its
// training part and scores its test part.
EvalScore subsample_validate(const Matrix& x, std::span<const int> y,
                             const std::vector<std::string>& class_labels, MetricKind metric,
                             const TrainProtocol& protocol,
                             const FeatureTransform& transform = {});

}  // namespace pmean

#endif  // PMEAN_CLASSIFIER_HPP

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

#ifndef PMEAN_PROJECTION_HPP
#define PMEAN_PROJECTION_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pmean/adam.hpp"
#include "pmean/embedding_store.hpp"
#include "pmean/types.hpp"

namespace pmean {

enum class Side { source, target };

// Two tanh maps into a shared space:
//   source: tanh(w_source * x + b_source),  x in R^e
//   target: tanh(w_target * x + b_target),  x in R^f
// w_source is d x e and w_target is d x f.
struct ProjectionModel {
  Matrix w_source;
  Vector b_source;
  Matrix w_target;
  Vector b_target;
  double margin = 0.5;

  Index source_dim() const { return w_source.cols(); }
  Index target_dim() const { return w_target.cols(); }
  Index shared_dim() const { return w_source.rows(); }
  Index input_dim(Side side) const {
    return side == Side::source ? source_dim() : target_dim();
  }

  friend bool operator==(const ProjectionModel& a, const ProjectionModel& b) {
    return a.margin == b.margin && a.w_source == b.w_source && a.b_source == b.b_source &&
           a.w_target == b.w_target && a.b_target == b.b_target;
  }
};

// Same shapes as the model parameters.
struct ProjectionGrads {
  Matrix w_source;
  Vector b_source;
  Matrix w_target;
  Vector b_target;

  static ProjectionGrads zeros_like(const ProjectionModel& model);
};

// Weights uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)), zero
// biases. Deterministic per seed.
ProjectionModel init_projection(Index e, Index f, Index d, std::uint64_t seed,
                                double margin = 0.5);

// Throws DimensionError when x does not match the side's input dimension.
Vector project(const ProjectionModel& model, Side side, const Vector& x);

// u.v / (|u| |v|), or 0 when either norm is below 1e-12.
double cosine(const Vector& u, const Vector& v);

// max(0, m - cos(r_s, r_t) + cos(r_s, r_u)) on the projected vectors.
double hinge_loss(const ProjectionModel& model, const Vector& x_s, const Vector& x_t,
                  const Vector& x_u);

// Same loss; adds its gradient with respect to every parameter into `grads`.
double hinge_loss_accumulate(const ProjectionModel& model, const Vector& x_s,
                             const Vector& x_t, const Vector& x_u, ProjectionGrads& grads);

// Row i of source pairs with row i of target (sentence-average vectors).
struct ParallelCorpus {
  Matrix source;
  Matrix target;

  std::size_t size() const { return static_cast<std::size_t>(source.rows()); }
  // Throws DataError / DimensionError when the invariants do not hold.
  void validate() const;
};

struct ProjectionTrainConfig {
  Index shared_dim = 300;
  double margin = 0.5;
  // Fraction of input entries zeroed during training. Kept entries are scaled
  // by 1 / (1 - dropout_rate).
  double dropout_rate = 0.5;
  AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
};

struct ProjectionTrainResult {
  ProjectionModel model;
  // Per epoch, the mean hinge loss of that epoch's (s, t, u) triples under the
  // current model without dropout, taken just before each minibatch update.
  std::vector<double> loss_history;
  // Same triples and timing, on the dropped-out inputs the gradient used.
  std::vector<double> dropout_loss_history;
};

// Each epoch reshuffles the pairs, draws one negative target per pair
// (without replacement, never the pair's own translation) and takes one Adam
// step per minibatch. Throws DataError for fewer than 2 pairs.
ProjectionTrainResult train_projection(const ParallelCorpus& corpus,
                                       const ProjectionTrainConfig& cfg);

// Same vocabulary; every row replaced by its projection.
EmbeddingSpace project_space(const ProjectionModel& model, Side side,
                             const EmbeddingSpace& space);

// Versioned JSON document, see docs/formats.md. Loading rejects unknown
// versions and inconsistent shapes with FormatError.
std::string projection_to_json(const ProjectionModel& model);
ProjectionModel projection_from_json(std::string_view text);

}  // namespace pmean

#endif  // PMEAN_PROJECTION_HPP

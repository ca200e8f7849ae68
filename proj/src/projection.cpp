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

#include "pmean/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "pmean/error.hpp"

namespace pmean {

namespace {

constexpr double kNormGuard = 1e-12;
constexpr int kFormatVersion = 1;

// Largest double below 1; keeps projected entries strictly inside (-1, 1)
// once tanh saturates in floating point.
const double kTanhBound = std::nextafter(1.0, 0.0);

Vector squash(const Vector& a) {
  return a.array().tanh().cwiseMax(-kTanhBound).cwiseMin(kTanhBound).matrix();
}

void check_input(const ProjectionModel& model, Side side, const Vector& x) {
  if (x.size() != model.input_dim(side))
    throw DimensionError(std::string(side == Side::source ? "source" : "target") +
                         " projection expects length " +
                         std::to_string(model.input_dim(side)) + ", got " +
                         std::to_string(x.size()));
}

// d cos(u, v) / du, zero under the norm guard.
Vector cosine_grad(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kNormGuard || nv < kNormGuard) return Vector::Zero(u.size());
  const double c = u.dot(v) / (nu * nv);
  return v / (nu * nv) - c * u / (nu * nu);
}

}  // namespace

ProjectionGrads ProjectionGrads::zeros_like(const ProjectionModel& model) {
  return {Matrix::Zero(model.w_source.rows(), model.w_source.cols()),
          Vector::Zero(model.b_source.size()),
          Matrix::Zero(model.w_target.rows(), model.w_target.cols()),
          Vector::Zero(model.b_target.size())};
}

ProjectionModel init_projection(Index e, Index f, Index d, std::uint64_t seed,
                                double margin) {
  if (e < 1 || f < 1 || d < 1) throw DataError("projection dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto uniform_matrix = [&rng](Index rows, Index cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
  };
  ProjectionModel model;
  model.margin = margin;
  model.w_source = uniform_matrix(d, e);
  model.b_source = Vector::Zero(d);
  model.w_target = uniform_matrix(d, f);
  model.b_target = Vector::Zero(d);
  return model;
}

Vector project(const ProjectionModel& model, Side side, const Vector& x) {
  check_input(model, side, x);
  if (side == Side::source) return squash(model.w_source * x + model.b_source);
  return squash(model.w_target * x + model.b_target);
}

double cosine(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kNormGuard || nv < kNormGuard) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double hinge_loss(const ProjectionModel& model, const Vector& x_s, const Vector& x_t,
                  const Vector& x_u) {
  const Vector r_s = project(model, Side::source, x_s);
  const Vector r_t = project(model, Side::target, x_t);
  const Vector r_u = project(model, Side::target, x_u);
  return std::max(0.0, model.margin - (cosine(r_s, r_t) - cosine(r_s, r_u)));
}

double hinge_loss_accumulate(const ProjectionModel& model, const Vector& x_s,
                             const Vector& x_t, const Vector& x_u, ProjectionGrads& grads) {
  const Vector r_s = project(model, Side::source, x_s);
  const Vector r_t = project(model, Side::target, x_t);
  const Vector r_u = project(model, Side::target, x_u);
  const double loss = model.margin - (cosine(r_s, r_t) - cosine(r_s, r_u));
  if (loss <= 0.0) return 0.0;

  const Vector g_s = cosine_grad(r_s, r_u) - cosine_grad(r_s, r_t);
  const Vector g_t = -cosine_grad(r_t, r_s);
  const Vector g_u = cosine_grad(r_u, r_s);

  // tanh'(a) = 1 - tanh(a)^2
  const Vector a_s = g_s.cwiseProduct((1.0 - r_s.array().square()).matrix());
  const Vector a_t = g_t.cwiseProduct((1.0 - r_t.array().square()).matrix());
  const Vector a_u = g_u.cwiseProduct((1.0 - r_u.array().square()).matrix());

  grads.w_source.noalias() += a_s * x_s.transpose();
  grads.b_source += a_s;
  grads.w_target.noalias() += a_t * x_t.transpose() + a_u * x_u.transpose();
  grads.b_target += a_t + a_u;
  return loss;
}

void ParallelCorpus::validate() const {
  if (source.rows() == 0) throw DataError("parallel corpus is empty");
  if (source.rows() != target.rows())
    throw DimensionError("parallel corpus has " + std::to_string(source.rows()) +
                         " source rows but " + std::to_string(target.rows()) +
                         " target rows");
  if (source.cols() < 1 || target.cols() < 1)
    throw DimensionError("parallel corpus vectors must be non-empty");
  if (!source.allFinite() || !target.allFinite())
    throw DataError("parallel corpus has non-finite entries");
}

namespace {

// Uniform permutation with fixed points swapped away, so pair i never gets its
// own translation as the negative.
std::vector<std::size_t> draw_negatives(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> neg(n);
  std::iota(neg.begin(), neg.end(), std::size_t{0});
  std::shuffle(neg.begin(), neg.end(), rng);
  for (std::size_t i = 0; i < n; ++i)
    if (neg[i] == i) std::swap(neg[i], neg[(i + 1) % n]);
  return neg;
}

void dropout(Vector& x, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < x.size(); ++i) x(i) = keep(rng) ? x(i) * scale : 0.0;
}

template <typename M>
std::span<double> flat(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename M>
std::span<const double> flat_const(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

ProjectionTrainResult train_projection(const ParallelCorpus& corpus,
                                       const ProjectionTrainConfig& cfg) {
  corpus.validate();
  const std::size_t n = corpus.size();
  if (n < 2) throw DataError("projection training needs at least 2 pairs");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw DataError("dropout rate must be in [0, 1)");
  if (cfg.batch_size < 1) throw DataError("batch size must be positive");

  ProjectionTrainResult result;
  result.model = init_projection(corpus.source.cols(), corpus.target.cols(), cfg.shared_dim,
                                 cfg.seed, cfg.margin);
  ProjectionModel& model = result.model;

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState s_w_source, s_b_source, s_w_target, s_b_target;
  long step = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto negatives = draw_negatives(n, rng);
    double epoch_loss = 0.0;
    double epoch_dropout_loss = 0.0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      ProjectionGrads grads = ProjectionGrads::zeros_like(model);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Vector x_s = corpus.source.row(static_cast<Index>(i)).transpose();
        Vector x_t = corpus.target.row(static_cast<Index>(i)).transpose();
        Vector x_u = corpus.target.row(static_cast<Index>(negatives[i])).transpose();
        if (cfg.dropout_rate > 0.0) {
          epoch_loss += hinge_loss(model, x_s, x_t, x_u);
          dropout(x_s, cfg.dropout_rate, rng);
          dropout(x_t, cfg.dropout_rate, rng);
          dropout(x_u, cfg.dropout_rate, rng);
          epoch_dropout_loss += hinge_loss_accumulate(model, x_s, x_t, x_u, grads);
        } else {
          const double loss = hinge_loss_accumulate(model, x_s, x_t, x_u, grads);
          epoch_loss += loss;
          epoch_dropout_loss += loss;
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      grads.w_source *= inv;
      grads.b_source *= inv;
      grads.w_target *= inv;
      grads.b_target *= inv;
      ++step;
      adam_step(flat(model.w_source), flat_const(grads.w_source), s_w_source, cfg.adam, step);
      adam_step(flat(model.b_source), flat_const(grads.b_source), s_b_source, cfg.adam, step);
      adam_step(flat(model.w_target), flat_const(grads.w_target), s_w_target, cfg.adam, step);
      adam_step(flat(model.b_target), flat_const(grads.b_target), s_b_target, cfg.adam, step);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    result.dropout_loss_history.push_back(epoch_dropout_loss / static_cast<double>(n));
  }
  return result;
}

EmbeddingSpace project_space(const ProjectionModel& model, Side side,
                             const EmbeddingSpace& space) {
  if (space.dim() != model.input_dim(side))
    throw DimensionError("space '" + space.name() + "' has dim " +
                         std::to_string(space.dim()) + ", projection expects " +
                         std::to_string(model.input_dim(side)));
  const Matrix& w = side == Side::source ? model.w_source : model.w_target;
  const Vector& b = side == Side::source ? model.b_source : model.b_target;
  Matrix out(static_cast<Index>(space.size()), model.shared_dim());
  for (Index i = 0; i < out.rows(); ++i)
    out.row(i) = squash(w * space.row(i).transpose() + b).transpose();
  return EmbeddingSpace(space.name(), space.tokens(), std::move(out), space.language());
}

namespace {

template <typename M>
nlohmann::json to_array(const M& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Matrix from_array(const nlohmann::json& doc, const char* key, Index rows, Index cols) {
  const auto& arr = doc.at(key);
  if (!arr.is_array() || static_cast<Index>(arr.size()) != rows * cols)
    throw FormatError(std::string("projection model: '") + key + "' must hold " +
                      std::to_string(rows * cols) + " numbers");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const auto& v = arr[static_cast<std::size_t>(i * cols + j)];
      if (!v.is_number())
        throw FormatError(std::string("projection model: non-numeric entry in '") + key + "'");
      m(i, j) = v.get<double>();
    }
  return m;
}

}  // namespace

std::string projection_to_json(const ProjectionModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = "pmean-projection";
  doc["version"] = kFormatVersion;
  doc["source_dim"] = model.source_dim();
  doc["target_dim"] = model.target_dim();
  doc["shared_dim"] = model.shared_dim();
  doc["margin"] = model.margin;
  doc["w_source"] = to_array(model.w_source);
  doc["b_source"] = to_array(Matrix(model.b_source.transpose()));
  doc["w_target"] = to_array(model.w_target);
  doc["b_target"] = to_array(Matrix(model.b_target.transpose()));
  return doc.dump(1) + "\n";
}

ProjectionModel projection_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("projection model: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "pmean-projection")
      throw FormatError("projection model: missing or wrong 'format'");
    const int version = doc.at("version").get<int>();
    if (version != kFormatVersion)
      throw FormatError("projection model: unsupported version " + std::to_string(version));
    const auto e = doc.at("source_dim").get<Index>();
    const auto f = doc.at("target_dim").get<Index>();
    const auto d = doc.at("shared_dim").get<Index>();
    if (e < 1 || f < 1 || d < 1) throw FormatError("projection model: dims must be positive");
    ProjectionModel model;
    model.margin = doc.at("margin").get<double>();
    model.w_source = from_array(doc, "w_source", d, e);
    model.b_source = from_array(doc, "b_source", 1, d).row(0).transpose();
    model.w_target = from_array(doc, "w_target", d, f);
    model.b_target = from_array(doc, "b_target", 1, d).row(0).transpose();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("projection model: ") + e.what());
  }
}

}  // namespace pmean

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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pmean::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    path_ = fs::temp_directory_path() / ("pmean-test-" + std::to_string(rng()));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& name, const std::string& contents) const {
  const fs::path p = path_ / name;
  std::ofstream out(p, std::ios::binary);
  out << contents;
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix normal_matrix(Index rows, Index cols, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

std::shared_ptr<const EmbeddingSpace> make_space(const std::string& name, const Matrix& rows,
                                                 const std::string& prefix) {
  std::vector<std::string> tokens;
  for (Index i = 0; i < rows.rows(); ++i) tokens.push_back(prefix + std::to_string(i));
  return std::make_shared<const EmbeddingSpace>(name, std::move(tokens), rows);
}

Blobs separable_blobs(std::size_t n, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Unit-width boxes whose inner edges sit at -gap/2 and +gap/2.
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  Blobs b;
  b.x.resize(static_cast<Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double cx = label == 0 ? -gap / 2 - 0.5 : gap / 2 + 0.5;
    b.x(static_cast<Index>(i), 0) = cx + box(rng);
    b.x(static_cast<Index>(i), 1) = 2.0 * box(rng);
    b.y.push_back(label);
  }
  return b;
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string pick(const std::string& prefix, std::size_t count, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, count - 1);
  return prefix + std::to_string(dist(rng));
}

}  // namespace

ComplementarityFixture complementarity_fixture(std::size_t sentences, std::uint64_t seed,
                                               double b_scale) {
  constexpr Index kDim = 16;
  struct Group {
    const char* prefix;
    std::size_t count;
  };
  const Group groups[] = {{"pos", 40}, {"neg", 40},  {"trig", 40},
                          {"damp", 40}, {"zero", 80}, {"fill", 200}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::normal_distribution<double> small(0.0, 0.1);
  std::uniform_real_distribution<double> below(-1.0, 0.0);

  std::vector<std::string> tokens;
  std::vector<std::vector<double>> a_rows, b_rows;
  for (const auto& g : groups) {
    const std::string prefix = g.prefix;
    for (std::size_t i = 0; i < g.count; ++i) {
      tokens.push_back(prefix + std::to_string(i));
      std::vector<double> a(kDim), b(kDim);
      for (auto& v : a) v = noise(rng);
      for (auto& v : b) v = noise(rng);
      a[0] = prefix == "pos" ? 1.0 : prefix == "neg" ? -1.0 : small(rng);
      b[3] = prefix == "trig" ? 2.0 : prefix == "damp" ? -2.0 : prefix == "zero" ? 0.0 : below(rng);
      a_rows.push_back(a);
      b_rows.push_back(b);
    }
  }
  Matrix a(static_cast<Index>(tokens.size()), kDim), b(a.rows(), kDim);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < kDim; ++j) {
      a(i, j) = a_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      b(i, j) = b_scale * b_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

  ComplementarityFixture fx;
  fx.space_a = std::make_shared<const EmbeddingSpace>("A", tokens, a, "en");
  fx.space_b = std::make_shared<const EmbeddingSpace>("B", tokens, b, "en");
  fx.task.name = "complementarity";
  fx.task.language = "en";
  fx.task.metric = MetricKind::accuracy;
  fx.task.classes = {"pos_spike", "pos_flat", "neg_spike", "neg_flat"};
  for (std::size_t s = 0; s < sentences; ++s) {
    const int label = static_cast<int>(s % 4);
    const bool positive = label < 2;
    const bool spike = label % 2 == 0;
    std::vector<std::string> words;
    for (int k = 0; k < 3; ++k) words.push_back(pick(positive ? "pos" : "neg", 40, rng));
    if (spike) {
      words.push_back(pick("trig", 40, rng));
      words.push_back(pick("damp", 40, rng));
    } else {
      words.push_back(pick("zero", 80, rng));
      words.push_back(pick("zero", 80, rng));
    }
    for (int k = 0; k < 5; ++k) words.push_back(pick("fill", 200, rng));
    std::shuffle(words.begin(), words.end(), rng);
    fx.task.items.push_back({label, join(words)});
  }
  return fx;
}

ZeroCrossingFixture zero_crossing_fixture(std::size_t sentences, std::uint64_t seed) {
  constexpr Index kDim = 16;
  constexpr std::size_t kVocab = 300;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::bernoulli_distribution is_zero(0.3);
  std::bernoulli_distribution flip(0.1);

  Matrix rows(static_cast<Index>(kVocab), kDim);
  for (Index i = 0; i < rows.size(); ++i) rows.data()[i] = is_zero(rng) ? 0.0 : value(rng);

  ZeroCrossingFixture fx;
  fx.space = make_space("Z", rows);
  fx.task.name = "zero-crossing";
  fx.task.metric = MetricKind::accuracy;
  fx.task.classes = {"neg", "pos"};
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<std::string> words;
    double sum = 0.0;
    for (int k = 0; k < 8; ++k) {
      const std::string w = pick("w", kVocab, rng);
      sum += rows(static_cast<Index>(std::stoul(w.substr(1))), 0);
      words.push_back(w);
    }
    int label = sum > 0.0 ? 1 : 0;
    if (flip(rng)) label = 1 - label;
    fx.task.items.push_back({label, join(words)});
  }
  return fx;
}

BilingualFixture bilingual_fixture(std::size_t sentences, std::uint64_t seed) {
  constexpr Index kDim = 16;
  struct Group {
    const char* prefix;
    std::size_t count;
  };
  const Group groups[] = {{"pos", 100}, {"neg", 100}, {"fill", 300}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::normal_distribution<double> small(0.0, 0.2);

  std::vector<std::string> en, de;
  std::vector<Vector> en_vecs, de_vecs;
  for (const auto& g : groups) {
    const std::string prefix = g.prefix;
    for (std::size_t i = 0; i < g.count; ++i) {
      en.push_back(prefix + std::to_string(i));
      de.push_back("de_" + en.back());
      Vector v(kDim), u(kDim);
      for (Index j = 0; j < kDim; ++j) v(j) = noise(rng);
      v(0) = prefix == "pos" ? 1.0 : prefix == "neg" ? -1.0 : small(rng);
      for (Index j = 0; j < kDim; ++j) u(j) = noise(rng);
      en_vecs.push_back(v);
      de_vecs.push_back(u);
    }
  }
  const auto n = static_cast<Index>(en.size());
  Matrix shared(2 * n, kDim), source(n, kDim), target(n, kDim);
  std::vector<std::string> shared_tokens;
  for (Index i = 0; i < n; ++i) {
    shared.row(i) = en_vecs[static_cast<std::size_t>(i)].transpose();
    shared.row(n + i) = en_vecs[static_cast<std::size_t>(i)].transpose();
    source.row(i) = en_vecs[static_cast<std::size_t>(i)].transpose();
    target.row(i) = de_vecs[static_cast<std::size_t>(i)].transpose();
  }
  shared_tokens = en;
  shared_tokens.insert(shared_tokens.end(), de.begin(), de.end());

  BilingualFixture fx;
  fx.shared = std::make_shared<const EmbeddingSpace>("BI", shared_tokens, shared);
  fx.source = std::make_shared<const EmbeddingSpace>("EN", en, source, "en");
  fx.target = std::make_shared<const EmbeddingSpace>("DE", de, target, "de");
  for (TaskDataset* ds : {&fx.train_en, &fx.test_de}) {
    ds->name = "polarity";
    ds->metric = MetricKind::accuracy;
    ds->classes = {"neg", "pos"};
  }
  fx.train_en.language = "en";
  fx.test_de.language = "de";
  for (std::size_t s = 0; s < sentences; ++s) {
    const int label = static_cast<int>(s % 2);
    std::vector<std::string> words;
    for (int k = 0; k < 2; ++k) words.push_back(pick(label ? "pos" : "neg", 100, rng));
    for (int k = 0; k < 6; ++k) words.push_back(pick("fill", 300, rng));
    std::shuffle(words.begin(), words.end(), rng);
    std::vector<std::string> translated;
    for (const auto& w : words) translated.push_back("de_" + w);
    fx.train_en.items.push_back({label, join(words)});
    fx.test_de.items.push_back({label, join(translated)});
  }
  return fx;
}

Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = normal_matrix(n, n, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

ParallelCorpus rotated_corpus(std::size_t pairs, Index dim, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix q = random_orthogonal(dim, rng);
  ParallelCorpus corpus;
  corpus.source = normal_matrix(static_cast<Index>(pairs), dim, 1.0, rng);
  corpus.target = corpus.source * q.transpose() +
                  normal_matrix(static_cast<Index>(pairs), dim, noise, rng);
  return corpus;
}

double retrieval_top1(const ProjectionModel& model, const ParallelCorpus& corpus,
                      std::size_t candidates, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  std::vector<Vector> src(n), tgt(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = project(model, Side::source, corpus.source.row(static_cast<Index>(i)).transpose());
    tgt[i] = project(model, Side::target, corpus.target.row(static_cast<Index>(i)).transpose());
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> others;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    others.resize(n);
    std::iota(others.begin(), others.end(), std::size_t{0});
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
    std::shuffle(others.begin(), others.end(), rng);
    const double truth = cosine(src[i], tgt[i]);
    bool best = true;
    for (std::size_t k = 0; k + 1 < candidates && k < others.size(); ++k)
      if (cosine(src[i], tgt[others[k]]) >= truth) best = false;
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

double relative_error(const std::vector<double>& a, const std::vector<double>& n) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  // The floor keeps rounding residue of an exactly-zero gradient (d = 1, where
  // cosine is locally constant) from reading as a relative error of 1.
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-8);
}

// Every parameter of the model in a fixed order.
std::vector<double*> parameters(ProjectionModel& m) {
  std::vector<double*> out;
  for (Matrix* w : {&m.w_source, &m.w_target})
    for (Index i = 0; i < w->size(); ++i) out.push_back(w->data() + i);
  for (Vector* b : {&m.b_source, &m.b_target})
    for (Index i = 0; i < b->size(); ++i) out.push_back(b->data() + i);
  return out;
}

std::vector<double> flatten(const ProjectionGrads& g) {
  std::vector<double> out;
  for (const Matrix* w : {&g.w_source, &g.w_target}) out.insert(out.end(), w->data(), w->data() + w->size());
  for (const Vector* b : {&g.b_source, &g.b_target}) out.insert(out.end(), b->data(), b->data() + b->size());
  return out;
}

}  // namespace

GradCheck projection_gradient_check(std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> dim(1, 5);
  const Index e = dim(rng), f = dim(rng), d = dim(rng);
  ProjectionModel model = init_projection(e, f, d, rng());
  std::normal_distribution<double> bias(0.0, 0.3);
  for (Index i = 0; i < d; ++i) {
    model.b_source[i] = bias(rng);
    model.b_target[i] = bias(rng);
  }
  const Matrix xs = normal_matrix(e, 1, 1.0, rng);
  const Matrix xt = normal_matrix(f, 1, 1.0, rng);
  const Matrix xu = normal_matrix(f, 1, 1.0, rng);
  const Vector s = xs.col(0), t = xt.col(0), u = xu.col(0);

  GradCheck out;
  const Vector rs = project(model, Side::source, s);
  const Vector rt = project(model, Side::target, t);
  const Vector ru = project(model, Side::target, u);
  const double slack = model.margin - cosine(rs, rt) + cosine(rs, ru);
  if (slack < 1e-6) return out;
  if (std::min({rs.norm(), rt.norm(), ru.norm()}) < 1e-6) return out;

  ProjectionGrads grads = ProjectionGrads::zeros_like(model);
  hinge_loss_accumulate(model, s, t, u, grads);
  const std::vector<double> analytic = flatten(grads);
  std::vector<double> numeric;
  for (double* p : parameters(model)) {
    const double saved = *p;
    *p = saved + step;
    const double up = hinge_loss(model, s, t, u);
    *p = saved - step;
    const double down = hinge_loss(model, s, t, u);
    *p = saved;
    numeric.push_back((up - down) / (2.0 * step));
  }
  out.rel_error = relative_error(analytic, numeric);
  out.usable = true;
  return out;
}

GradCheck softmax_gradient_check(std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> classes(2, 5), width(1, 6), rows(1, 8);
  const Index c = classes(rng), d = width(rng), n = rows(rng);
  SoftmaxModel model;
  model.weights = normal_matrix(c, d, 1.0, rng);
  model.bias = normal_matrix(c, 1, 1.0, rng).col(0);
  for (Index k = 0; k < c; ++k) model.class_labels.push_back("c" + std::to_string(k));
  const Matrix x = normal_matrix(n, d, 1.0, rng);
  std::uniform_int_distribution<int> label(0, static_cast<int>(c) - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int& v : y) v = label(rng);
  const double l2 = std::bernoulli_distribution(0.5)(rng) ? 0.1 : 0.0;

  const XentResult exact = softmax_xent(model, x, y, l2);
  std::vector<double> analytic(exact.grad_weights.data(),
                               exact.grad_weights.data() + exact.grad_weights.size());
  analytic.insert(analytic.end(), exact.grad_bias.data(),
                  exact.grad_bias.data() + exact.grad_bias.size());
  std::vector<double*> params;
  for (Index i = 0; i < model.weights.size(); ++i) params.push_back(model.weights.data() + i);
  for (Index i = 0; i < model.bias.size(); ++i) params.push_back(model.bias.data() + i);
  std::vector<double> numeric;
  for (double* p : params) {
    const double saved = *p;
    *p = saved + step;
    const double up = softmax_xent(model, x, y, l2).loss;
    *p = saved - step;
    const double down = softmax_xent(model, x, y, l2).loss;
    *p = saved;
    numeric.push_back((up - down) / (2.0 * step));
  }
  return {relative_error(analytic, numeric), true};
}

}  // namespace pmean::testing

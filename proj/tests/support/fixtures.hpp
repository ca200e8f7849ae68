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

// Synthetic spaces, tasks and corpora shared by the unit and acceptance
// suites. Every generator is deterministic in its seed.

#ifndef PMEAN_TESTS_FIXTURES_HPP
#define PMEAN_TESTS_FIXTURES_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pmean/classifier.hpp"
#include "pmean/embedding_store.hpp"
#include "pmean/eval_harness.hpp"
#include "pmean/projection.hpp"
#include "pmean/types.hpp"

namespace pmean::testing {

// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  // Writes `contents` to path()/name and returns the full path.
  std::filesystem::path write(const std::string& name, const std::string& contents) const;

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, std::mt19937_64& rng);
Matrix normal_matrix(Index rows, Index cols, double sigma, std::mt19937_64& rng);

// Space with tokens "w0", "w1", ... over the given rows.
std::shared_ptr<const EmbeddingSpace> make_space(const std::string& name, const Matrix& rows,
                                                 const std::string& prefix = "w");

// Two uniform boxes in 2-d separated by `gap` along x, labels alternating 0/1.
struct Blobs {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> classes{"a", "b"};
};
Blobs separable_blobs(std::size_t n, double gap, std::uint64_t seed);

// Two 16-d spaces over one vocabulary and a 4-class task. The first label bit
// is the sign of dimension 0 averaged in space A; the second is whether the
// maximum of dimension 3 in space B is large. B's dimension-3 mean carries no
// signal, so mean pooling of B sees neither bit.
struct ComplementarityFixture {
  std::shared_ptr<const EmbeddingSpace> space_a;
  std::shared_ptr<const EmbeddingSpace> space_b;
  TaskDataset task;
};
ComplementarityFixture complementarity_fixture(std::size_t sentences, std::uint64_t seed,
                                               double b_scale = 1.0);

// 16-d space whose entries cross zero and are frequently exactly zero; binary
// task on the sign of mean dimension 0 with 10% label noise.
struct ZeroCrossingFixture {
  std::shared_ptr<const EmbeddingSpace> space;
  TaskDataset task;
};
ZeroCrossingFixture zero_crossing_fixture(std::size_t sentences, std::uint64_t seed);

// Binary polarity task over an English vocabulary "w*", a German vocabulary
// "de_w*" (token-for-token translations) and:
//   shared: one bilingual space where w_i and de_w_i have identical vectors;
//   source / target: separate monolingual spaces with independent vectors.
struct BilingualFixture {
  std::shared_ptr<const EmbeddingSpace> shared;
  std::shared_ptr<const EmbeddingSpace> source;
  std::shared_ptr<const EmbeddingSpace> target;
  TaskDataset train_en;
  TaskDataset test_de;
};
BilingualFixture bilingual_fixture(std::size_t sentences, std::uint64_t seed);

// Random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(Index n, std::mt19937_64& rng);

// source ~ N(0, 1); target = Q source + N(0, noise^2).
ParallelCorpus rotated_corpus(std::size_t pairs, Index dim, double noise, std::uint64_t seed);

// Fraction of source rows whose true target ranks first by projected cosine
// among itself and `candidates - 1` other targets drawn without replacement.
double retrieval_top1(const ProjectionModel& model, const ParallelCorpus& corpus,
                      std::size_t candidates, std::uint64_t seed);

// Central-difference check of an analytic gradient on one random small
// instance. rel_error is |g_a - g_n| / max(|g_a| + |g_n|, 1e-8) over the
// flattened parameter vector. `usable` is false when the hinge is inactive,
// within 1e-6 of its kink, or a projected vector has norm below 1e-6.
struct GradCheck {
  double rel_error = 0.0;
  bool usable = false;
};
GradCheck projection_gradient_check(std::uint64_t seed, double step = 1e-5);
GradCheck softmax_gradient_check(std::uint64_t seed, double step = 1e-5);

}  // namespace pmean::testing

#endif  // PMEAN_TESTS_FIXTURES_HPP

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

#ifndef PMEAN_POOLING_HPP
#define PMEAN_POOLING_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pmean/embedding_store.hpp"
#include "pmean/types.hpp"

namespace pmean {

// Exponent of a power mean: a finite real (0 is the geometric mean) or +/-inf
// (column max / min).
class PValue {
 public:
  enum class Kind { finite, plus_infinity, minus_infinity };

  // Throws DataError for NaN. Infinite doubles map to the infinite kinds.
  explicit PValue(double p);
  static PValue plus_infinity() { return PValue(Kind::plus_infinity); }
  static PValue minus_infinity() { return PValue(Kind::minus_infinity); }

  // Accepts decimal reals and inf, +inf, -inf. Throws FormatError.
  static PValue parse(std::string_view text);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  // +/-infinity for the infinite kinds.
  double value() const;
  bool is_integer() const;
  bool is_odd_integer() const;

  // Shortest round-trip decimal; infinities print as inf / -inf.
  std::string to_string() const;

  friend bool operator==(const PValue&, const PValue&) = default;

 private:
  explicit PValue(Kind k) : kind_(k) {}
  Kind kind_ = Kind::finite;
  double p_ = 1.0;
};

// Comma-separated list, e.g. "-inf,1,inf".
std::vector<PValue> parse_p_list(std::string_view text);
std::string format_p_list(const std::vector<PValue>& ps);

enum class OnUndefined { nan_to_zero, error };

// What to do where a real power is undefined: a negative base with a
// non-integer p, a base with |x| <= epsilon when p < 0, a non-positive base at
// p = 0, or (p < 0) an inner mean of x^p that cancels to within epsilon of zero
// relative to its largest term. Overflow to +/-inf is treated the same way.
struct SingularityPolicy {
  double epsilon = 1e-12;
  OnUndefined on_undefined = OnUndefined::nan_to_zero;
  // Number of output entries replaced by 0.
  std::size_t undefined_counter = 0;
};

// Column-wise power mean of the rows of `rows` (n >= 1).
Vector power_mean(const Matrix& rows, const PValue& p, SingularityPolicy& policy);

// One part of a concatenated representation: a space and the power means
// taken over it, in the given order.
struct PoolPart {
  std::shared_ptr<const EmbeddingSpace> space;
  std::vector<PValue> p_values;
};

// Ordered list of parts. Output length is sum(|p_values_i| * d_i).
class PooledConfig {
 public:
  PooledConfig() = default;
  // Throws DataError when empty, a part has no p-values or a null space.
  explicit PooledConfig(std::vector<PoolPart> parts);

  const std::vector<PoolPart>& parts() const { return parts_; }
  Index output_dim() const { return output_dim_; }

  // "name[-inf,1,inf] + other[1]".
  std::string describe() const;

 private:
  std::vector<PoolPart> parts_;
  Index output_dim_ = 0;
};

struct EmbedOptions {
  TokenizerConfig tokenizer;
  OovPolicy oov;
  SingularityPolicy singularity;
};

struct PoolingStats {
  std::size_t undefined = 0;
  std::size_t oov_tokens = 0;
  std::size_t fallbacks = 0;
};

Vector pool_sentence(const EmbeddingSpace& space, const std::vector<PValue>& p_values,
                     const std::vector<std::string>& tokens, const OovPolicy& oov,
                     SingularityPolicy& singularity, PoolingStats* stats = nullptr);

Vector concat_embedding(const PooledConfig& cfg, const std::vector<std::string>& tokens,
                        const OovPolicy& oov, SingularityPolicy& singularity,
                        PoolingStats* stats = nullptr);

// Row i is the concatenated embedding of sentences[i]. Rows may be computed on
// up to `threads` threads; the result does not depend on the thread count.
// options.singularity.undefined_counter is advanced by the total tally.
Matrix embed_corpus(const PooledConfig& cfg, const std::vector<std::string>& sentences,
                    EmbedOptions& options, unsigned threads = 1,
                    PoolingStats* stats = nullptr);

}  // namespace pmean

#endif  // PMEAN_POOLING_HPP

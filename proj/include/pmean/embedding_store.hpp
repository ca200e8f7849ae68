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

#ifndef PMEAN_EMBEDDING_STORE_HPP
#define PMEAN_EMBEDDING_STORE_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmean/types.hpp"

namespace pmean {

// A vocabulary-indexed matrix of word vectors. Immutable after construction,
// so a loaded space can be shared between threads.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  // Throws DimensionError if tokens.size() != vectors.rows() and DataError on
  // empty or duplicate tokens, a zero-width matrix, or non-finite entries.
  EmbeddingSpace(std::string name, std::vector<std::string> tokens,
                 Matrix vectors, std::optional<std::string> language = {});

  const std::string& name() const { return name_; }
  const std::optional<std::string>& language() const { return language_; }
  Index dim() const { return vectors_.cols(); }
  std::size_t size() const { return tokens_.size(); }

  // Tokens in row order.
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Matrix& vectors() const { return vectors_; }

  std::optional<Index> find(std::string_view token) const;
  auto row(Index i) const { return vectors_.row(i); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::string name_;
  std::optional<std::string> language_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index, Hash, std::equal_to<>> index_;
  Matrix vectors_;
};

struct LoadedSpace {
  EmbeddingSpace space;
  // Lines whose token had already appeared; the first occurrence wins.
  std::size_t duplicates = 0;
  bool had_header = false;
};

// Reads the word2vec-text / GloVe format: `token v1 ... vd` per line, with an
// optional leading `count dim` header. LF and CRLF line endings are accepted.
LoadedSpace load_text_embeddings(const std::filesystem::path& path,
                                 std::optional<Index> expected_dim = {},
                                 std::string name = {},
                                 std::optional<std::string> language = {});
LoadedSpace read_text_embeddings(std::istream& in,
                                 std::optional<Index> expected_dim = {},
                                 std::string name = {},
                                 std::optional<std::string> language = {});

// Writes with a `count dim` header and round-trip precision.
void write_text_embeddings(const EmbeddingSpace& space, std::ostream& out);

struct TokenizerConfig {
  bool lowercase = true;
};

// Splits on ASCII whitespace and drops empty tokens. Lowercasing only touches
// ASCII letters, so UTF-8 sequences pass through unchanged.
std::vector<std::string> tokenize(const TokenizerConfig& cfg, std::string_view sentence);

enum class OovMode { skip, zero_vector };

struct OovPolicy {
  OovMode mode = OovMode::skip;
};

struct Lookup {
  Matrix rows;
  std::size_t oov = 0;
  // Set when no row survived and a single zero row was substituted.
  bool fallback = false;
};

// Never fails: out-of-vocabulary tokens degrade per policy and an empty result
// becomes one zero row.
Lookup lookup_sequence(const EmbeddingSpace& space,
                       const std::vector<std::string>& tokens,
                       const OovPolicy& policy);

}  // namespace pmean

#endif  // PMEAN_EMBEDDING_STORE_HPP

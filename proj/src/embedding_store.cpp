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

#include "pmean/embedding_store.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "pmean/error.hpp"

namespace pmean {

EmbeddingSpace::EmbeddingSpace(std::string name, std::vector<std::string> tokens,
                               Matrix vectors, std::optional<std::string> language)
    : name_(std::move(name)),
      language_(std::move(language)),
      tokens_(std::move(tokens)),
      vectors_(std::move(vectors)) {
  if (static_cast<Index>(tokens_.size()) != vectors_.rows())
    throw DimensionError("embedding space '" + name_ + "': " +
                         std::to_string(tokens_.size()) + " tokens but " +
                         std::to_string(vectors_.rows()) + " rows");
  if (vectors_.cols() < 1)
    throw DataError("embedding space '" + name_ + "' has zero-width vectors");
  if (!vectors_.allFinite())
    throw DataError("embedding space '" + name_ + "' has non-finite entries");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty())
      throw DataError("embedding space '" + name_ + "': empty token at row " +
                      std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<Index>(i)).second)
      throw DataError("embedding space '" + name_ + "': duplicate token '" +
                      tokens_[i] + "'");
  }
}

std::optional<Index> EmbeddingSpace::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double parse_value(std::string_view s, std::size_t line_no) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("cannot parse value '" + std::string(s) + "'", line_no);
  if (!std::isfinite(v))
    throw FormatError("non-finite value '" + std::string(s) + "'", line_no);
  return v;
}

}  // namespace

LoadedSpace read_text_embeddings(std::istream& in, std::optional<Index> expected_dim,
                                 std::string name, std::optional<std::string> language) {
  LoadedSpace result;
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::unordered_map<std::string, bool> seen;
  std::optional<Index> header_dim;
  Index dim = -1;

  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (first_content) {
      first_content = false;
      if (fields.size() == 2) {
        auto count = parse_integer(fields[0]);
        auto d = parse_integer(fields[1]);
        if (count && d) {
          if (*count < 0 || *d < 1)
            throw FormatError("invalid header '" + line + "'", line_no);
          header_dim = static_cast<Index>(*d);
          result.had_header = true;
          continue;
        }
      }
    }

    if (fields.size() < 2)
      throw FormatError("expected a token followed by at least one value", line_no);
    const auto width = static_cast<Index>(fields.size() - 1);
    if (dim < 0) {
      dim = width;
      if (header_dim && *header_dim != dim)
        throw FormatError("header declares dim " + std::to_string(*header_dim) +
                              " but vectors have " + std::to_string(dim) + " values",
                          line_no);
    } else if (width != dim) {
      throw FormatError("ragged line: expected " + std::to_string(dim) +
                            " values, found " + std::to_string(width),
                        line_no);
    }

    std::string token(fields[0]);
    if (!seen.emplace(token, true).second) {
      // Still validate the values so a malformed duplicate is reported.
      for (std::size_t k = 1; k < fields.size(); ++k) parse_value(fields[k], line_no);
      ++result.duplicates;
      continue;
    }
    for (std::size_t k = 1; k < fields.size(); ++k)
      values.push_back(parse_value(fields[k], line_no));
    tokens.push_back(std::move(token));
  }

  if (dim < 0) dim = header_dim.value_or(expected_dim.value_or(1));
  if (expected_dim && *expected_dim != dim)
    throw DimensionError("expected dimension " + std::to_string(*expected_dim) +
                         ", file has " + std::to_string(dim));

  Matrix vectors(static_cast<Index>(tokens.size()), dim);
  if (!values.empty())
    vectors = Eigen::Map<const Matrix>(values.data(), vectors.rows(), dim);
  result.space = EmbeddingSpace(std::move(name), std::move(tokens), std::move(vectors),
                                std::move(language));
  return result;
}

LoadedSpace load_text_embeddings(const std::filesystem::path& path,
                                 std::optional<Index> expected_dim, std::string name,
                                 std::optional<std::string> language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding file '" + path.string() + "'");
  if (name.empty()) name = path.stem().string();
  try {
    return read_text_embeddings(in, expected_dim, std::move(name), std::move(language));
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }
}

void write_text_embeddings(const EmbeddingSpace& space, std::ostream& out) {
  char buf[64];
  out << space.size() << ' ' << space.dim() << '\n';
  const Matrix& m = space.vectors();
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.tokens()[i];
    for (Index j = 0; j < m.cols(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m(static_cast<Index>(i), j));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

std::vector<std::string> tokenize(const TokenizerConfig& cfg, std::string_view sentence) {
  std::vector<std::string> tokens;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !is_space(sentence[j])) ++j;
    if (j > i) {
      std::string tok(sentence.substr(i, j - i));
      if (cfg.lowercase)
        for (char& c : tok)
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

Lookup lookup_sequence(const EmbeddingSpace& space, const std::vector<std::string>& tokens,
                       const OovPolicy& policy) {
  Lookup out;
  std::vector<std::optional<Index>> ids;
  ids.reserve(tokens.size());
  Index kept = 0;
  for (const auto& t : tokens) {
    auto id = space.find(t);
    if (!id) ++out.oov;
    if (id || policy.mode == OovMode::zero_vector) ++kept;
    ids.push_back(id);
  }
  if (kept == 0) {
    out.rows = Matrix::Zero(1, space.dim());
    out.fallback = true;
    return out;
  }
  out.rows.resize(kept, space.dim());
  Index r = 0;
  for (const auto& id : ids) {
    if (id)
      out.rows.row(r++) = space.row(*id);
    else if (policy.mode == OovMode::zero_vector)
      out.rows.row(r++).setZero();
  }
  return out;
}

}  // namespace pmean

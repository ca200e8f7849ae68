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

#include "pmean/pooling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmean/error.hpp"
#include "pmean/parallel.hpp"

namespace pmean {

PValue::PValue(double p) {
  if (std::isnan(p)) throw DataError("power mean exponent is NaN");
  if (std::isinf(p))
    kind_ = p > 0 ? Kind::plus_infinity : Kind::minus_infinity;
  else
    p_ = p;
}

PValue PValue::parse(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return plus_infinity();
  if (s == "-inf") return minus_infinity();
  std::string_view digits = s;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (s.empty() || ec != std::errc() || ptr != digits.data() + digits.size() ||
      !std::isfinite(v))
    throw FormatError("invalid p-value '" + std::string(text) + "'");
  return PValue(v);
}

double PValue::value() const {
  switch (kind_) {
    case Kind::plus_infinity: return std::numeric_limits<double>::infinity();
    case Kind::minus_infinity: return -std::numeric_limits<double>::infinity();
    case Kind::finite: break;
  }
  return p_;
}

bool PValue::is_integer() const {
  return is_finite() && std::abs(p_) < 0x1p53 && std::trunc(p_) == p_;
}

bool PValue::is_odd_integer() const {
  return is_integer() && std::fmod(std::abs(p_), 2.0) == 1.0;
}

std::string PValue::to_string() const {
  if (kind_ == Kind::plus_infinity) return "inf";
  if (kind_ == Kind::minus_infinity) return "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p_);
  return std::string(buf, ptr);
}

std::vector<PValue> parse_p_list(std::string_view text) {
  std::vector<PValue> ps;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    ps.push_back(PValue::parse(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return ps;
}

std::string format_p_list(const std::vector<PValue>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ',';
    out += ps[i].to_string();
  }
  return out;
}

namespace {

// Sum in ascending order, so the result does not depend on row order.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

// Returns NaN where the column's power mean is undefined; the caller applies
// the policy.
double column_power_mean(const Matrix& rows, Index col, const PValue& p, double eps,
                         double* offending) {
  const Index n = rows.rows();
  auto x = rows.col(col);

  if (p.kind() == PValue::Kind::plus_infinity) return x.maxCoeff();
  if (p.kind() == PValue::Kind::minus_infinity) return x.minCoeff();

  const double pv = p.value();
  std::vector<double> terms(static_cast<std::size_t>(n));
  if (pv == 1.0) {
    for (Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = x(i);
    return ordered_sum(terms) / static_cast<double>(n);
  }

  if (pv == 0.0) {
    for (Index i = 0; i < n; ++i) {
      if (!(x(i) > 0.0)) {
        *offending = x(i);
        return std::numeric_limits<double>::quiet_NaN();
      }
      terms[static_cast<std::size_t>(i)] = std::log(x(i));
    }
    return std::exp(ordered_sum(terms) / static_cast<double>(n));
  }

  const bool integral = p.is_integer();
  double scale = pv > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double v = x(i);
    if ((pv < 0 && std::abs(v) <= eps) || (!integral && v < 0.0)) {
      *offending = v;
      return std::numeric_limits<double>::quiet_NaN();
    }
    scale = pv > 0 ? std::max(scale, std::abs(v)) : std::min(scale, std::abs(v));
  }
  if (scale == 0.0) return 0.0;

  // M_p(x) = c * M_p(x / c) for c > 0. Scaling by max|x| (p > 0) or min|x|
  // (p < 0) bounds every term by 1 in magnitude, so x^p cannot overflow.
  for (Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = std::pow(x(i) / scale, pv);
  const double m = ordered_sum(terms) / static_cast<double>(n);

  if (pv < 0 && std::abs(m) <= eps) {
    *offending = m;
    return std::numeric_limits<double>::quiet_NaN();
  }
  double r;
  if (m < 0.0)  // only reachable for odd integer p
    r = -scale * std::pow(-m, 1.0 / pv);
  else
    r = scale * std::pow(m, 1.0 / pv);
  if (!std::isfinite(r)) {
    *offending = m;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace

Vector power_mean(const Matrix& rows, const PValue& p, SingularityPolicy& policy) {
  if (rows.rows() < 1) throw DimensionError("power mean of an empty sequence");
  Vector out(rows.cols());
  for (Index j = 0; j < rows.cols(); ++j) {
    double offending = 0.0;
    const double v = column_power_mean(rows, j, p, policy.epsilon, &offending);
    if (std::isnan(v)) {
      if (policy.on_undefined == OnUndefined::error) {
        std::ostringstream msg;
        msg << "power mean p=" << p.to_string() << " undefined at dimension " << j
            << " (offending value " << offending << ")";
        throw NumericalPolicyError(msg.str());
      }
      ++policy.undefined_counter;
      out(j) = 0.0;
    } else {
      out(j) = v;
    }
  }
  return out;
}

PooledConfig::PooledConfig(std::vector<PoolPart> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw DataError("pooled config has no parts");
  for (const auto& part : parts_) {
    if (!part.space) throw DataError("pooled config part has no embedding space");
    if (part.p_values.empty())
      throw DataError("pooled config part '" + part.space->name() + "' has no p-values");
    output_dim_ += static_cast<Index>(part.p_values.size()) * part.space->dim();
  }
}

std::string PooledConfig::describe() const {
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += " + ";
    out += parts_[i].space->name() + "[" + format_p_list(parts_[i].p_values) + "]";
  }
  return out;
}

Vector pool_sentence(const EmbeddingSpace& space, const std::vector<PValue>& p_values,
                     const std::vector<std::string>& tokens, const OovPolicy& oov,
                     SingularityPolicy& singularity, PoolingStats* stats) {
  if (p_values.empty()) throw DataError("pool_sentence needs at least one p-value");
  const Lookup lookup = lookup_sequence(space, tokens, oov);
  const std::size_t before = singularity.undefined_counter;
  Vector out(static_cast<Index>(p_values.size()) * space.dim());
  for (std::size_t k = 0; k < p_values.size(); ++k)
    out.segment(static_cast<Index>(k) * space.dim(), space.dim()) =
        power_mean(lookup.rows, p_values[k], singularity);
  if (stats) {
    stats->undefined += singularity.undefined_counter - before;
    stats->oov_tokens += lookup.oov;
    stats->fallbacks += lookup.fallback ? 1 : 0;
  }
  return out;
}

Vector concat_embedding(const PooledConfig& cfg, const std::vector<std::string>& tokens,
                        const OovPolicy& oov, SingularityPolicy& singularity,
                        PoolingStats* stats) {
  Vector out(cfg.output_dim());
  Index offset = 0;
  for (const auto& part : cfg.parts()) {
    Vector s = pool_sentence(*part.space, part.p_values, tokens, oov, singularity, stats);
    out.segment(offset, s.size()) = s;
    offset += s.size();
  }
  return out;
}

Matrix embed_corpus(const PooledConfig& cfg, const std::vector<std::string>& sentences,
                    EmbedOptions& options, unsigned threads, PoolingStats* stats) {
  const std::size_t n = sentences.size();
  Matrix out(static_cast<Index>(n), cfg.output_dim());
  std::vector<PoolingStats> row_stats(n);
  parallel_for(n, threads, [&](std::size_t i) {
    SingularityPolicy local = options.singularity;
    local.undefined_counter = 0;
    auto tokens = tokenize(options.tokenizer, sentences[i]);
    out.row(static_cast<Index>(i)) =
        concat_embedding(cfg, tokens, options.oov, local, &row_stats[i]).transpose();
  });
  PoolingStats total;
  for (const auto& s : row_stats) {
    total.undefined += s.undefined;
    total.oov_tokens += s.oov_tokens;
    total.fallbacks += s.fallbacks;
  }
  options.singularity.undefined_counter += total.undefined;
  if (stats) {
    stats->undefined += total.undefined;
    stats->oov_tokens += total.oov_tokens;
    stats->fallbacks += total.fallbacks;
  }
  return out;
}

}  // namespace pmean

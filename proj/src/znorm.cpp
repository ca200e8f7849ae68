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

#include "pmean/znorm.hpp"

#include <string>

#include "pmean/error.hpp"

namespace pmean {

ZNormParams znorm_fit(const Matrix& x, double floor) {
  if (x.rows() < 1) throw DataError("z-norm fit needs at least one row");
  ZNormParams params;
  params.floor = floor;
  params.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - params.mean.transpose();
  params.std = (centered.colwise().squaredNorm() / static_cast<double>(x.rows()))
                   .cwiseSqrt()
                   .transpose()
                   .cwiseMax(floor);
  return params;
}

Matrix znorm_apply(const ZNormParams& params, const Matrix& x) {
  if (x.cols() != params.mean.size())
    throw DimensionError("z-norm expects " + std::to_string(params.mean.size()) +
                         " columns, got " + std::to_string(x.cols()));
  return (x.rowwise() - params.mean.transpose()).array().rowwise() /
         params.std.transpose().array();
}

Vector znorm_apply(const ZNormParams& params, const Vector& x) {
  if (x.size() != params.mean.size())
    throw DimensionError("z-norm expects length " + std::to_string(params.mean.size()) +
                         ", got " + std::to_string(x.size()));
  return (x - params.mean).cwiseQuotient(params.std);
}

}  // namespace pmean

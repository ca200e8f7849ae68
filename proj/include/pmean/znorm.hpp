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

#ifndef PMEAN_ZNORM_HPP
#define PMEAN_ZNORM_HPP

#include "pmean/types.hpp"

namespace pmean {

// Column statistics for z-normalization. std is the population standard
// deviation, floored so constant columns map to 0 instead of dividing by 0.
struct ZNormParams {
  Vector mean;
  Vector std;
  double floor = 1e-8;
};

// Throws DataError for an empty matrix.
ZNormParams znorm_fit(const Matrix& x, double floor = 1e-8);

// (x - mean) / std per column. Throws DimensionError on a width mismatch.
Matrix znorm_apply(const ZNormParams& params, const Matrix& x);
Vector znorm_apply(const ZNormParams& params, const Vector& x);

}  // namespace pmean

#endif  // PMEAN_ZNORM_HPP

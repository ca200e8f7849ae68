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

#ifndef PMEAN_ADAM_HPP
#define PMEAN_ADAM_HPP

#include <span>
#include <vector>

namespace pmean {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates, one entry per parameter. Empty state is
// zero-initialized on first use.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam update applied in place. t is the 1-based step count.
// Throws DimensionError on size mismatches and DataError when t < 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg, long t);

}  // namespace pmean

#endif  // PMEAN_ADAM_HPP

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

#include "pmean/adam.hpp"

#include <cmath>
#include <string>

#include "pmean/error.hpp"

namespace pmean {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg, long t) {
  if (t < 1) throw DataError("adam step count must be >= 1");
  if (grads.size() != params.size())
    throw DimensionError("adam: " + std::to_string(params.size()) + " params but " +
                         std::to_string(grads.size()) + " gradients");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw DimensionError("adam: state size does not match parameters");

  const double td = static_cast<double>(t);
  const double correct1 = 1.0 - std::pow(cfg.beta1, td);
  const double correct2 = 1.0 - std::pow(cfg.beta2, td);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / correct1;
    const double v_hat = state.v[i] / correct2;
    params[i] -= cfg.step_size * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace pmean

//
// Copyright 2026 The dptab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPTAB_OPTIM_H_
#define DPTAB_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dptab/network.h"
#include "dptab/tensor.h"

namespace dptab {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

// Adaptive-moment accumulators. The moment tensors are created on the first
// update and mirror the parameter shapes from then on.
struct OptimState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

// One bias-corrected Adam step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void AdamUpdate(const ParamRefs& params, std::span<const Tensor> grads,
                OptimState& state);

}  // namespace dptab

#endif  // DPTAB_OPTIM_H_

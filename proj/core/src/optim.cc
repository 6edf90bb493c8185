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

#include "dptab/optim.h"

#include <cmath>
#include <string>

#include "dptab/error.h"

namespace dptab {

void AdamUpdate(const ParamRefs& params, std::span<const Tensor> grads,
                OptimState& state) {
  Require(params.size() == grads.size(),
          "adam: " + std::to_string(grads.size()) + " gradients for " +
              std::to_string(params.size()) + " parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].get().SameShape(grads[i])) {
      Fail(ErrorCode::kInvalidArgument,
           "adam: gradient " + grads[i].ShapeString() + " for parameter " +
               params[i].get().ShapeString());
    }
  }
  if (state.first_moment.empty()) {
    for (const Tensor& g : grads) {
      state.first_moment.emplace_back(g.rows(), g.cols());
      state.second_moment.emplace_back(g.rows(), g.cols());
    }
  }
  Require(state.first_moment.size() == params.size(),
          "adam: optimizer state belongs to a different parameter set");

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.first_moment[i].mat();
    Matrix& v = state.second_moment[i].mat();
    const Matrix& g = grads[i].mat();
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    params[i].get().mat().array() -=
        c.learning_rate * (m.array() / correction1) /
        ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

}  // namespace dptab

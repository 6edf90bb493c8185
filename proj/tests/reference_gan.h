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

#ifndef DPTAB_TESTS_REFERENCE_GAN_H_
#define DPTAB_TESTS_REFERENCE_GAN_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dptab/gan.h"
#include "dptab/layer.h"

namespace dptab::testing_util {

// Generator gradient computed layer by layer straight through D and A,
// without any sanitization boundary.
inline std::vector<Tensor> ReferenceGeneratorGradient(const Models& m,
                                               const GeneratorInput& in,
                                               double aux_weight) {
  auto forward_all = [](const Network& n, Tensor x, std::vector<LayerCache>* caches) {
    for (const Layer& l : n.layers()) {
      ForwardResult f = Forward(l, x);
      caches->push_back(f.cache);
      x = f.output;
    }
    return x;
  };
  auto backward_from = [](const Network& n, const std::vector<LayerCache>& caches,
                          Tensor d, std::size_t last, std::vector<Tensor>* grads) {
    std::vector<std::vector<Tensor>> per_layer(n.layers().size());
    for (std::size_t i = last + 1; i-- > 0;) {
      BackwardResult b = Backward(n.layers()[i], caches[i], d);
      per_layer[i] = std::move(b.d_params);
      d = b.d_input;
    }
    if (grads != nullptr) {
      for (auto& g : per_layer) grads->insert(grads->end(), g.begin(), g.end());
    }
    return d;
  };

  const std::size_t b = in.input.rows();
  std::vector<LayerCache> gc;
  const Tensor fake = forward_all(m.generator, in.input, &gc);
  const std::size_t w = fake.cols();

  std::vector<LayerCache> dc;
  forward_all(m.discriminator, Concat(fake, in.conds.cond), &dc);
  const std::size_t d_last = m.discriminator.layers().size() - 1;
  // d(-log sigmoid(z))/dz, taken at the sigmoid's input.
  Tensor dz(b, 1);
  for (std::size_t r = 0; r < b; ++r) {
    const double z = dc[d_last].input(r, 0);
    dz(r, 0) = -1.0 / (1.0 + std::exp(z)) / static_cast<double>(b);
  }
  const Tensor d_in = backward_from(m.discriminator, dc, dz, d_last - 1, nullptr);
  Tensor d_fake(b, w);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t c = 0; c < w; ++c) d_fake(r, c) = d_in(r, c);
  }

  if (m.has_aux()) {
    const AuxTarget& t = *m.aux_target;
    std::vector<LayerCache> ac;
    forward_all(m.auxiliary, StripTarget(fake, t), &ac);
    const std::size_t a_last = m.auxiliary.layers().size() - 1;
    const Tensor& logits = ac[a_last].input;
    Tensor dl(b, logits.cols());
    for (std::size_t r = 0; r < b; ++r) {
      std::size_t label = 0;
      for (std::size_t k = 1; k < t.classes; ++k) {
        if (fake(r, t.one_hot_offset + k) > fake(r, t.one_hot_offset + label)) label = k;
      }
      if (in.conds.conditions[r].column == t.column) label = in.conds.conditions[r].mode;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < logits.cols(); ++k) mx = std::max(mx, logits(r, k));
      double s = 0.0;
      for (std::size_t k = 0; k < logits.cols(); ++k) s += std::exp(logits(r, k) - mx);
      for (std::size_t k = 0; k < logits.cols(); ++k) {
        const double p = std::exp(logits(r, k) - mx) / s;
        dl(r, k) = (p - (k == label ? 1.0 : 0.0)) / static_cast<double>(b);
      }
    }
    const Tensor da = backward_from(m.auxiliary, ac, dl, a_last - 1, nullptr);
    for (std::size_t r = 0; r < b; ++r) {
      std::size_t src = 0;
      for (std::size_t c = 0; c < w; ++c) {
        if (c >= t.block_offset && c < t.block_offset + t.block_width) continue;
        d_fake(r, c) += aux_weight * da(r, src++);
      }
    }
  }
  std::vector<Tensor> grads;
  backward_from(m.generator, gc, d_fake, m.generator.layers().size() - 1, &grads);
  return grads;
}

// Plain Adam written out element by element, same constants as the library.
inline void ReferenceAdam(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                          std::vector<Tensor>& m, std::vector<Tensor>& v, int t,
                          double lr, double beta1 = 0.5, double beta2 = 0.9,
                          double eps = 1e-8) {
  if (m.empty()) {
    for (const Tensor& g : grads) {
      m.emplace_back(g.rows(), g.cols());
      v.emplace_back(g.rows(), g.cols());
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t r = 0; r < params[i].rows(); ++r) {
      for (std::size_t c = 0; c < params[i].cols(); ++c) {
        const double g = grads[i](r, c);
        m[i](r, c) = beta1 * m[i](r, c) + (1.0 - beta1) * g;
        v[i](r, c) = beta2 * v[i](r, c) + (1.0 - beta2) * g * g;
        const double mh = m[i](r, c) / (1.0 - std::pow(beta1, t));
        const double vh = v[i](r, c) / (1.0 - std::pow(beta2, t));
        params[i](r, c) -= lr * mh / (std::sqrt(vh) + eps);
      }
    }
  }
}

}  // namespace dptab::testing_util

#endif  // DPTAB_TESTS_REFERENCE_GAN_H_

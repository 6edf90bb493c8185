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

#include "dptab/network.h"

#include <algorithm>
#include <string>

#include "dptab/error.h"

namespace dptab {

Network::Network(std::vector<Layer> layers) {
  for (Layer& l : layers) Add(std::move(l));
}

void Network::Add(Layer layer) {
  if (!layers_.empty() && layer.config.in_width != out_width()) {
    Fail(ErrorCode::kInvalidArgument,
         "network: " + std::string(LayerKindName(layer.kind)) +
             " expects width " + std::to_string(layer.config.in_width) +
             " but previous layer produces " + std::to_string(out_width()));
  }
  layers_.push_back(std::move(layer));
}

std::size_t Network::in_width() const {
  return layers_.empty() ? 0 : layers_.front().config.in_width;
}

std::size_t Network::out_width() const {
  return layers_.empty() ? 0 : layers_.back().config.out_width;
}

bool Network::Contains(LayerKind kind) const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [kind](const Layer& l) { return l.kind == kind; });
}

Tensor Network::Forward(const Tensor& input,
                        std::vector<LayerCache>* caches) const {
  if (caches != nullptr) {
    caches->clear();
    caches->reserve(layers_.size());
  }
  Tensor x = input;
  for (const Layer& layer : layers_) {
    ForwardResult r = dptab::Forward(layer, x);
    x = std::move(r.output);
    if (caches != nullptr) caches->push_back(std::move(r.cache));
  }
  return x;
}

Tensor Network::Backward(const std::vector<LayerCache>& caches,
                         const Tensor& d_output,
                         std::vector<Tensor>* grads,
                         std::size_t skip_last) const {
  Require(caches.size() == layers_.size(),
          "network backward: cache count does not match layer count");
  Require(skip_last <= layers_.size(), "network backward: skip_last too large");
  std::vector<std::vector<Tensor>> per_layer(layers_.size());
  for (std::size_t i = layers_.size() - skip_last; i < layers_.size(); ++i) {
    for (const Tensor& p : layers_[i].params) {
      per_layer[i].emplace_back(p.rows(), p.cols());
    }
  }
  Tensor d = d_output;
  for (std::size_t i = layers_.size() - skip_last; i-- > 0;) {
    BackwardResult r = dptab::Backward(layers_[i], caches[i], d);
    d = std::move(r.d_input);
    per_layer[i] = std::move(r.d_params);
  }
  if (grads != nullptr) {
    grads->clear();
    for (auto& g : per_layer) {
      for (Tensor& t : g) grads->push_back(std::move(t));
    }
  }
  return d;
}

ParamRefs Network::Parameters() {
  ParamRefs refs;
  for (Layer& l : layers_) {
    for (Tensor& p : l.params) refs.emplace_back(p);
  }
  return refs;
}

std::vector<Tensor> Network::ParameterValues() const {
  std::vector<Tensor> out;
  for (const Layer& l : layers_) {
    out.insert(out.end(), l.params.begin(), l.params.end());
  }
  return out;
}

std::size_t Network::ParameterCount() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) {
    for (const Tensor& p : l.params) n += p.size();
  }
  return n;
}

}  // namespace dptab

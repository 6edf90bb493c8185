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

#ifndef DPTAB_NETWORK_H_
#define DPTAB_NETWORK_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "dptab/layer.h"
#include "dptab/tensor.h"

namespace dptab {

using ParamRefs = std::vector<std::reference_wrapper<Tensor>>;

// A feed-forward chain of layers. Parameters are addressed in a flat order:
// layer by layer, and within a layer in its documented parameter order.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  // Appends a layer; its input width must match the current output width.
  void Add(Layer layer);

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t in_width() const;
  std::size_t out_width() const;
  bool Contains(LayerKind kind) const;

  Tensor Forward(const Tensor& input, std::vector<LayerCache>* caches) const;
  Tensor Forward(const Tensor& input) const { return Forward(input, nullptr); }

  // Returns the gradient with respect to the network input. When `grads` is
  // non-null it receives one gradient per parameter, in flat order.
  // `skip_last` > 0 starts the pass below the last `skip_last` layers, so
  // `d_output` is then the gradient with respect to their input (e.g. the
  // logits under a final sigmoid).
  Tensor Backward(const std::vector<LayerCache>& caches, const Tensor& d_output,
                  std::vector<Tensor>* grads, std::size_t skip_last = 0) const;

  ParamRefs Parameters();
  std::vector<Tensor> ParameterValues() const;
  std::size_t ParameterCount() const;

 private:
  std::vector<Layer> layers_;
};

}  // namespace dptab

#endif  // DPTAB_NETWORK_H_

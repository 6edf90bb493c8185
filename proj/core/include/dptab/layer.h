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

#ifndef DPTAB_LAYER_H_
#define DPTAB_LAYER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dptab/rng.h"
#include "dptab/tensor.h"

namespace dptab {

enum class LayerKind {
  kAffine,
  kLeakyRelu,
  kTanh,
  kSigmoid,
  kSoftmaxGroup,
  kLayerNorm,
  kSelfAttention,
};

std::string_view LayerKindName(LayerKind kind);
LayerKind LayerKindFromName(std::string_view name);

// Half-open column block [offset, offset + width).
struct ColumnRange {
  std::size_t offset = 0;
  std::size_t width = 0;

  friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

struct LayerConfig {
  std::size_t in_width = 0;
  std::size_t out_width = 0;
  double leak_slope = 0.2;
  // kTanh: columns that get the nonlinearity (empty = all). kSoftmaxGroup:
  // one softmax per range. Columns outside every range pass through.
  std::vector<ColumnRange> ranges;
  double norm_epsilon = 1e-5;
  std::size_t token_count = 0;
  std::size_t token_width = 0;

  friend bool operator==(const LayerConfig&, const LayerConfig&) = default;
};

// Parameter layout per kind:
//   kAffine         {weight (in, out), bias (1, out)}
//   kLayerNorm      {gain (1, width), bias (1, width)}
//   kSelfAttention  {Wq, Wk, Wv, Wo}, each (token_width, token_width)
//   others          {}
struct Layer {
  LayerKind kind = LayerKind::kAffine;
  std::vector<Tensor> params;
  LayerConfig config;
};

Layer MakeAffine(std::size_t in, std::size_t out, Rng& rng);
Layer MakeAffine(Tensor weight, Tensor bias);
Layer MakeLeakyRelu(std::size_t width, double slope = 0.2);
Layer MakeTanh(std::size_t width, std::vector<ColumnRange> active = {});
Layer MakeSigmoid(std::size_t width);
Layer MakeSoftmaxGroup(std::size_t width, std::vector<ColumnRange> groups);
Layer MakeLayerNorm(std::size_t width);
Layer MakeSelfAttention(std::size_t token_count, std::size_t token_width,
                        Rng& rng);

// Whatever Backward needs from the matching Forward call. A default
// constructed cache is "missing" and is rejected by Backward.
struct LayerCache {
  bool valid = false;
  LayerKind kind = LayerKind::kAffine;
  Tensor input;
  Tensor output;
  std::vector<Tensor> extra;
};

struct ForwardResult {
  Tensor output;
  LayerCache cache;
};

struct BackwardResult {
  Tensor d_input;
  std::vector<Tensor> d_params;
};

ForwardResult Forward(const Layer& layer, const Tensor& input);
BackwardResult Backward(const Layer& layer, const LayerCache& cache,
                        const Tensor& d_output);

// Compares Backward against central finite differences (step 1e-5) of the
// probe loss sum(R * Forward(x)) with random x of shape (3, in_width) and
// random R. Returns the worst relative error over every input and parameter
// coordinate in every trial.
double GradCheck(const Layer& layer, int trials, std::uint64_t seed);

}  // namespace dptab

#endif  // DPTAB_LAYER_H_

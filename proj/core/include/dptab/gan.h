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

#ifndef DPTAB_GAN_H_
#define DPTAB_GAN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dptab/codec.h"
#include "dptab/network.h"
#include "dptab/optim.h"
#include "dptab/privacy.h"
#include "dptab/rng.h"
#include "dptab/tensor.h"

namespace dptab {

struct Hyper {
  std::size_t z_dim = 64;
  std::vector<std::size_t> gen_hidden = {256, 256};
  std::vector<std::size_t> disc_hidden = {256, 256};
  // Exactly four hidden stages.
  std::vector<std::size_t> aux_hidden = {64, 64, 64, 64};
  std::size_t batch = 64;
  std::size_t steps = 5000;
  double sigma = 0.0;
  double clip = 1.0;
  double delta = kDefaultDelta;
  std::vector<int> lambda_grid = DefaultLambdaGrid();
  std::uint64_t seed = 0;
  double aux_weight = 1.0;
  bool attention = false;
  std::size_t token_width = 8;
  std::size_t max_modes = kDefaultMaxModes;
  double learning_rate = 2e-4;
  // Draw privacy noise from the OS instead of the seeded stream.
  bool os_entropy = false;

  void Validate() const;
  SanitizerConfig sanitizer() const { return {clip, batch, sigma}; }
};

// Where the auxiliary classifier's label lives in an encoded row. The whole
// target column block (alpha included, for numeric targets) is removed from
// the classifier input; the classes are the block's one-hot slots.
struct AuxTarget {
  std::size_t column = 0;
  std::size_t block_offset = 0;
  std::size_t block_width = 0;
  std::size_t one_hot_offset = 0;
  std::size_t classes = 0;
};

struct Models {
  Network generator;
  Network discriminator;
  Network auxiliary;  // empty when the schema has no target
  std::optional<AuxTarget> aux_target;
  OptimState gen_opt;
  OptimState disc_opt;
  OptimState aux_opt;

  bool has_aux() const { return aux_target.has_value(); }
};

Models InitModels(const EncodedLayout& layout, const TableSchema& schema,
                  const Hyper& hyper, Rng& rng);

// Rows of `encoded` with the target block removed (classifier input).
Tensor StripTarget(const Tensor& encoded, const AuxTarget& target);

// Training-by-sampling batch: one condition per row, and for real batches a
// row drawn from those that match the condition.
struct ConditionBatch {
  std::vector<Condition> conditions;
  Tensor cond;  // (B, cond_width) one-hot rows
};

ConditionBatch SampleConditions(const CodecState& codec, std::size_t batch,
                                Rng& rng,
                                ConditionWeighting weighting =
                                    ConditionWeighting::kLogFrequency);
Tensor SampleRealRows(const EncodedTable& table, const ConditionBatch& conds,
                      Rng& rng);
Tensor SampleUniformRows(const EncodedTable& table, std::size_t batch,
                         Rng& rng);

// Latent draw and conditions for one generator pass.
struct GeneratorInput {
  ConditionBatch conds;
  Tensor z;
  Tensor input;  // z concatenated with cond
};

GeneratorInput DrawGeneratorInput(const CodecState& codec, std::size_t z_dim,
                                  std::size_t batch, Rng& rng,
                                  ConditionWeighting weighting =
                                      ConditionWeighting::kLogFrequency);

Tensor Concat(const Tensor& left, const Tensor& right);

// One non-saturating BCE step on the discriminator: real rows with their
// conditions against generator samples under the same conditions. Only the
// discriminator is updated.
double DiscStep(Models& models, const Tensor& real_rows, const Tensor& cond,
                Rng& rng);

// One cross-entropy step on the auxiliary classifier over real rows. Fails
// when the schema has no target column.
double AuxStep(Models& models, const Tensor& real_rows);

// Instrumentation for one generator update.
struct GenStepTrace {
  Tensor boundary_gradient;   // dL_G / dG(z) before sanitization
  Tensor sanitized_gradient;  // what is backpropagated through G
  std::vector<Tensor> generator_gradients;
};

// Generator loss and its gradient with respect to G's parameters for a given
// input. The gradient of L_G with respect to the generator output is taken
// through D and A only, sanitized, then pushed through G.
struct GeneratorGradients {
  double loss = 0.0;
  GenStepTrace trace;
};

GeneratorGradients ComputeGeneratorGradients(const Models& models,
                                             const GeneratorInput& input,
                                             const SanitizerConfig& sanitizer,
                                             double aux_weight,
                                             Rng& noise_rng);

// Draws an input with `rng`, applies the update to G only and records one
// ledger update when sigma > 0.
double GenStep(Models& models, PrivacyLedger& ledger, const CodecState& codec,
               const Hyper& hyper, Rng& rng, Rng& noise_rng,
               GenStepTrace* trace = nullptr);

struct Checkpoint {
  Hyper hyper;
  CodecState codec;
  Models models;
  PrivacyLedger ledger{SanitizerConfig{}};
  std::uint64_t step = 0;
};

struct StepLosses {
  std::size_t step = 0;
  double disc = 0.0;
  double aux = 0.0;
  double gen = 0.0;
};

using StepCallback = std::function<void(const StepLosses&)>;

// Encodes the table, then runs hyper.steps iterations of
// {DiscStep, AuxStep, GenStep}. Deterministic in hyper.seed unless
// hyper.os_entropy is set.
Checkpoint Fit(const StringGrid& raw, const TableSchema& schema,
               const Hyper& hyper, const StepCallback& on_step = nullptr);

// As Fit, on an already encoded table.
Checkpoint FitEncoded(const EncodeResult& encoded, const Hyper& hyper,
                      const StepCallback& on_step = nullptr);

// Raw generator output for n rows (soft one-hots), conditions drawn with
// data frequencies.
Tensor Generate(const Checkpoint& checkpoint, std::size_t n, Rng& rng);

// Generate, harden and decode. Touches neither the training data nor the
// ledger.
StringGrid Sample(const Checkpoint& checkpoint, std::size_t n, Rng& rng);

}  // namespace dptab

#endif  // DPTAB_GAN_H_

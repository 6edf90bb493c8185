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

#include <vector>

#include "benchmark/benchmark.h"
#include "dptab/codec.h"
#include "dptab/eval.h"
#include "dptab/gan.h"
#include "dptab/layer.h"
#include "dptab/privacy.h"
#include "test_util.h"

namespace dptab {
namespace {

Tensor RandomTensor(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.Normal();
  return t;
}

void BM_AffineForwardBackward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Layer l = MakeAffine(width, width, rng);
  const Tensor x = RandomTensor(64, width, rng);
  const Tensor d = RandomTensor(64, width, rng);
  for (auto _ : state) {
    const ForwardResult f = Forward(l, x);
    benchmark::DoNotOptimize(Backward(l, f.cache, d));
  }
}
BENCHMARK(BM_AffineForwardBackward)->Arg(32)->Arg(256);

void BM_LayerNormForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const Layer l = MakeLayerNorm(256);
  const Tensor x = RandomTensor(64, 256, rng);
  const Tensor d = RandomTensor(64, 256, rng);
  for (auto _ : state) {
    const ForwardResult f = Forward(l, x);
    benchmark::DoNotOptimize(Backward(l, f.cache, d));
  }
}
BENCHMARK(BM_LayerNormForwardBackward);

void BM_SelfAttentionForwardBackward(benchmark::State& state) {
  Rng rng(3);
  const Layer l = MakeSelfAttention(8, 8, rng);
  const Tensor x = RandomTensor(64, 64, rng);
  const Tensor d = RandomTensor(64, 64, rng);
  for (auto _ : state) {
    const ForwardResult f = Forward(l, x);
    benchmark::DoNotOptimize(Backward(l, f.cache, d));
  }
}
BENCHMARK(BM_SelfAttentionForwardBackward);

void BM_Sanitize(benchmark::State& state) {
  Rng rng(4);
  const Tensor g = RandomTensor(64, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Sanitize(g, {1.0, 64, 1.0}, rng));
}
BENCHMARK(BM_Sanitize);

void BM_TrainingStep(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const TableSchema schema = testing_util::ToySchema();
  const EncodeResult enc = EncodeTable(testing_util::ToyTable(2000, 5), schema,
                                       kDefaultMaxModes, 5);
  Hyper h;
  h.gen_hidden = {width, width};
  h.disc_hidden = {width, width};
  h.sigma = 1.0;
  Rng rng(6), noise(7);
  Models m = InitModels(enc.state.layout, schema, h, rng);
  PrivacyLedger ledger(h.sanitizer(), h.delta);
  for (auto _ : state) {
    const ConditionBatch c = SampleConditions(enc.state, h.batch, rng);
    DiscStep(m, SampleRealRows(enc.table, c, rng), c.cond, rng);
    AuxStep(m, SampleUniformRows(enc.table, h.batch, rng));
    benchmark::DoNotOptimize(GenStep(m, ledger, enc.state, h, rng, noise));
  }
}
BENCHMARK(BM_TrainingStep)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MembershipAttack(benchmark::State& state) {
  Rng rng(8);
  const Tensor members = RandomTensor(200, 6, rng);
  const Tensor nonmembers = RandomTensor(200, 6, rng);
  const Tensor synth = RandomTensor(200, 6, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(MembershipAttack(members, nonmembers, synth));
  }
}
BENCHMARK(BM_MembershipAttack);

}  // namespace
}  // namespace dptab

BENCHMARK_MAIN();

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

#include <cmath>
#include <vector>

#include "dptab/error.h"
#include "dptab/layer.h"
#include "dptab/network.h"
#include "dptab/optim.h"
#include "dptab/rng.h"
#include "dptab/tensor.h"
#include "gtest/gtest.h"

namespace dptab {
namespace {

constexpr double kGradTolerance = 1e-4;

std::vector<Layer> AllKinds(Rng& rng) {
  std::vector<Layer> layers;
  layers.push_back(MakeAffine(5, 4, rng));
  layers.push_back(MakeLeakyRelu(6));
  layers.push_back(MakeTanh(6, {{0, 2}, {4, 1}}));
  layers.push_back(MakeSigmoid(3));
  layers.push_back(MakeSoftmaxGroup(7, {{0, 3}, {4, 3}}));
  layers.push_back(MakeLayerNorm(6));
  layers.push_back(MakeSelfAttention(3, 4, rng));
  return layers;
}

Tensor RandomTensor(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.Normal();
  return t;
}

TEST(AffineTest, ForwardMatchesHandArithmetic) {
  const Layer l = MakeAffine(Tensor::From({{2}}), Tensor::From({{1}}));
  EXPECT_EQ(Forward(l, Tensor::From({{3}})).output, Tensor::From({{7}}));
}

TEST(AffineTest, BackwardMatchesLinearJacobians) {
  const Layer l = MakeAffine(Tensor::From({{2}}), Tensor::From({{0}}));
  const ForwardResult f = Forward(l, Tensor::From({{3}}));
  const BackwardResult b = Backward(l, f.cache, Tensor::From({{1}}));
  EXPECT_EQ(b.d_input, Tensor::From({{2}}));
  ASSERT_EQ(b.d_params.size(), 2u);
  EXPECT_EQ(b.d_params[0], Tensor::From({{3}}));
  EXPECT_EQ(b.d_params[1], Tensor::From({{1}}));
}

TEST(AffineTest, RejectsWrongInputWidth) {
  Rng rng(1);
  const Layer l = MakeAffine(3, 2, rng);
  try {
    Forward(l, Tensor(2, 4));
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(LayerNormTest, ConstantRowMapsToZero) {
  const ForwardResult f = Forward(MakeLayerNorm(3), Tensor::From({{5, 5, 5}}));
  for (double v : f.output.values()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNormTest, RowsHaveZeroMeanAndEpsilonShrunkVariance) {
  Rng rng(3);
  const Tensor x = RandomTensor(20, 8, rng);
  const Tensor y = Forward(MakeLayerNorm(8), x).output;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.mat().row(static_cast<Eigen::Index>(r));
    const auto yr = y.mat().row(static_cast<Eigen::Index>(r));
    const double var_in = (xr.array() - xr.mean()).square().mean();
    const double var_out = (yr.array() - yr.mean()).square().mean();
    EXPECT_NEAR(yr.mean(), 0.0, 1e-10);
    EXPECT_NEAR(var_out, var_in / (var_in + 1e-5), 1e-12);
  }
}

TEST(LayerNormTest, LargeVarianceRowsAreUnitVariance) {
  Rng rng(4);
  Tensor x = RandomTensor(10, 8, rng);
  x.mat() *= 1e3;
  const Tensor y = Forward(MakeLayerNorm(8), x).output;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto yr = y.mat().row(static_cast<Eigen::Index>(r));
    EXPECT_NEAR((yr.array() - yr.mean()).square().mean(), 1.0, 1e-8);
  }
}

TEST(SoftmaxGroupTest, SymmetricInputGivesUniform) {
  const Tensor y =
      Forward(MakeSoftmaxGroup(2, {{0, 2}}), Tensor::From({{0, 0}})).output;
  EXPECT_EQ(y, Tensor::From({{0.5, 0.5}}));
}

TEST(SoftmaxGroupTest, GroupsSumToOneAndPassThroughElsewhere) {
  Rng rng(5);
  const Tensor x = RandomTensor(50, 7, rng);
  const Tensor y = Forward(MakeSoftmaxGroup(7, {{0, 3}, {4, 3}}), x).output;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double s1 = 0, s2 = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_GT(y(r, c), 0.0);
      EXPECT_LT(y(r, c), 1.0);
      s1 += y(r, c);
      s2 += y(r, c + 4);
    }
    EXPECT_NEAR(s1, 1.0, 1e-12);
    EXPECT_NEAR(s2, 1.0, 1e-12);
    EXPECT_EQ(y(r, 3), x(r, 3));
  }
}

TEST(SelfAttentionTest, PermutingTokensPermutesOutput) {
  Rng rng(6);
  const std::size_t tokens = 4, width = 3;
  const Layer l = MakeSelfAttention(tokens, width, rng);
  const Tensor x = RandomTensor(5, tokens * width, rng);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  Tensor xp(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t t = 0; t < tokens; ++t) {
      for (std::size_t k = 0; k < width; ++k) {
        xp(r, t * width + k) = x(r, perm[t] * width + k);
      }
    }
  }
  const Tensor y = Forward(l, x).output;
  const Tensor yp = Forward(l, xp).output;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t t = 0; t < tokens; ++t) {
      for (std::size_t k = 0; k < width; ++k) {
        EXPECT_NEAR(yp(r, t * width + k), y(r, perm[t] * width + k), 1e-10);
      }
    }
  }
}

TEST(LayerTest, EveryKindPassesGradientCheck) {
  Rng rng(7);
  for (const Layer& l : AllKinds(rng)) {
    EXPECT_LT(GradCheck(l, 10, 11), kGradTolerance) << LayerKindName(l.kind);
  }
}

TEST(LayerTest, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng(8);
  for (const Layer& l : AllKinds(rng)) {
    const Tensor x = RandomTensor(3, l.config.in_width, rng);
    const ForwardResult f = Forward(l, x);
    const BackwardResult b =
        Backward(l, f.cache, Tensor(f.output.rows(), f.output.cols()));
    EXPECT_EQ(b.d_input.Norm(), 0.0) << LayerKindName(l.kind);
    for (const Tensor& g : b.d_params) EXPECT_EQ(g.Norm(), 0.0);
  }
}

TEST(LayerTest, BackwardRejectsMissingOrForeignCache) {
  Rng rng(9);
  const Layer affine = MakeAffine(2, 2, rng);
  EXPECT_THROW(Backward(affine, LayerCache{}, Tensor(1, 2)), Error);
  const ForwardResult f = Forward(MakeTanh(2), Tensor(1, 2));
  EXPECT_THROW(Backward(affine, f.cache, Tensor(1, 2)), Error);
}

TEST(LayerTest, ForwardIsDeterministic) {
  Rng rng(10);
  for (const Layer& l : AllKinds(rng)) {
    const Tensor x = RandomTensor(4, l.config.in_width, rng);
    EXPECT_EQ(Forward(l, x).output, Forward(l, x).output);
  }
}

TEST(NetworkTest, RejectsMismatchedWidths) {
  Rng rng(11);
  Network n;
  n.Add(MakeAffine(3, 4, rng));
  EXPECT_THROW(n.Add(MakeAffine(5, 2, rng)), Error);
}

TEST(NetworkTest, BackwardMatchesFiniteDifferences) {
  Rng rng(12);
  Network n;
  n.Add(MakeAffine(4, 6, rng));
  n.Add(MakeLayerNorm(6));
  n.Add(MakeLeakyRelu(6));
  n.Add(MakeAffine(6, 3, rng));
  n.Add(MakeTanh(3));
  const Tensor x = RandomTensor(2, 4, rng);
  const Tensor probe = RandomTensor(2, 3, rng);
  std::vector<LayerCache> caches;
  n.Forward(x, &caches);
  std::vector<Tensor> grads;
  n.Backward(caches, probe, &grads);
  auto loss = [&]() {
    return (n.Forward(x).mat().array() * probe.mat().array()).sum();
  };
  ParamRefs params = n.Parameters();
  ASSERT_EQ(params.size(), grads.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = params[p].get();
    for (double& v : t.values()) {
      const std::size_t i = static_cast<std::size_t>(&v - t.values().data());
      const double keep = v;
      v = keep + 1e-6;
      const double up = loss();
      v = keep - 1e-6;
      const double down = loss();
      v = keep;
      EXPECT_NEAR(grads[p].values()[i], (up - down) / 2e-6, 1e-6);
    }
  }
}

TEST(NetworkTest, SkippedLastLayerPassesGradientThrough) {
  Rng rng(13);
  Network n;
  n.Add(MakeAffine(2, 1, rng));
  n.Add(MakeSigmoid(1));
  std::vector<LayerCache> caches;
  n.Forward(Tensor::From({{1, 2}}), &caches);
  std::vector<Tensor> grads;
  const Tensor d = n.Backward(caches, Tensor::From({{1}}), &grads, 1);
  const Tensor& w = n.layers()[0].params[0];
  EXPECT_DOUBLE_EQ(d(0, 0), w(0, 0));
  EXPECT_DOUBLE_EQ(d(0, 1), w(1, 0));
}

TEST(AdamTest, ZeroGradientLeavesParametersAndMoments) {
  Tensor p = Tensor::From({{1, 2}});
  ParamRefs refs = {std::ref(p)};
  OptimState state;
  const std::vector<Tensor> zero = {Tensor(1, 2)};
  AdamUpdate(refs, zero, state);
  EXPECT_EQ(p, Tensor::From({{1, 2}}));
  EXPECT_EQ(state.step, 1u);
  EXPECT_EQ(state.first_moment[0].Norm(), 0.0);
  EXPECT_EQ(state.second_moment[0].Norm(), 0.0);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Tensor p = Tensor::From({{0.0, 0.0}});
  ParamRefs refs = {std::ref(p)};
  OptimState state;
  AdamUpdate(refs, std::vector<Tensor>{Tensor::From({{3.0, -0.5}})}, state);
  EXPECT_NEAR(p(0, 0), -2e-4, 1e-10);
  EXPECT_NEAR(p(0, 1), 2e-4, 1e-10);
}

TEST(AdamTest, RejectsShapeMismatch) {
  Tensor p(1, 2);
  ParamRefs refs = {std::ref(p)};
  OptimState state;
  EXPECT_THROW(AdamUpdate(refs, std::vector<Tensor>{Tensor(2, 1)}, state), Error);
}

TEST(AdamTest, SameStartGivesSameTrajectory) {
  auto run = [] {
    Tensor p = Tensor::From({{0.3, -0.7}});
    ParamRefs refs = {std::ref(p)};
    OptimState state;
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
      AdamUpdate(refs, std::vector<Tensor>{Tensor::From({{rng.Normal(), rng.Normal()}})},
                 state);
    }
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(RngTest, SeededStreamsRepeat) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.Normal(), b.Normal());
}

TEST(RngTest, UniformStaysInRange) {
  Rng rng(43);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.UniformInt(7), 7u);
  }
}

}  // namespace
}  // namespace dptab

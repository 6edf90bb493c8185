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
#include <limits>
#include <vector>

#include "dptab/codec.h"
#include "dptab/csv.h"
#include "dptab/error.h"
#include "dptab/gan.h"
#include "gtest/gtest.h"
#include "reference_gan.h"
#include "test_util.h"

namespace dptab {
namespace {

Hyper SmallHyper() {
  Hyper h;
  h.z_dim = 4;
  h.gen_hidden = {8};
  h.disc_hidden = {8};
  h.aux_hidden = {4, 4, 4, 4};
  h.batch = 8;
  h.steps = 20;
  h.seed = 3;
  return h;
}

struct Fixture {
  TableSchema schema = testing_util::ToySchema();
  EncodeResult enc = EncodeTable(testing_util::ToyTable(200, 5), schema, 10, 1);
};

std::vector<Tensor> Snapshot(const Network& n) { return n.ParameterValues(); }

bool Changed(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return true;
  }
  return false;
}

TEST(InitModelsTest, SameSeedSameParameters) {
  Fixture f;
  Rng a(9), b(9);
  const Models m1 = InitModels(f.enc.state.layout, f.schema, SmallHyper(), a);
  const Models m2 = InitModels(f.enc.state.layout, f.schema, SmallHyper(), b);
  EXPECT_EQ(Snapshot(m1.generator), Snapshot(m2.generator));
  EXPECT_EQ(Snapshot(m1.discriminator), Snapshot(m2.discriminator));
  EXPECT_EQ(Snapshot(m1.auxiliary), Snapshot(m2.auxiliary));
}

TEST(InitModelsTest, AttentionFlagControlsTheLayer) {
  Fixture f;
  Hyper h = SmallHyper();
  Rng rng(1);
  EXPECT_FALSE(InitModels(f.enc.state.layout, f.schema, h, rng)
                   .generator.Contains(LayerKind::kSelfAttention));
  h.attention = true;
  const Models m = InitModels(f.enc.state.layout, f.schema, h, rng);
  EXPECT_TRUE(m.generator.Contains(LayerKind::kSelfAttention));
  EXPECT_EQ(m.generator.out_width(), f.enc.state.layout.row_width);
}

TEST(InitModelsTest, NetworkShapes) {
  Fixture f;
  Rng rng(1);
  const Models m = InitModels(f.enc.state.layout, f.schema, SmallHyper(), rng);
  const EncodedLayout& l = f.enc.state.layout;
  EXPECT_EQ(m.generator.in_width(), 4 + l.cond_width);
  EXPECT_EQ(m.discriminator.in_width(), l.row_width + l.cond_width);
  EXPECT_EQ(m.discriminator.out_width(), 1u);
  EXPECT_TRUE(m.discriminator.Contains(LayerKind::kLayerNorm));
  ASSERT_TRUE(m.has_aux());
  EXPECT_EQ(m.auxiliary.out_width(), 2u);
  std::size_t affine = 0;
  for (const Layer& layer : m.auxiliary.layers()) affine += layer.kind == LayerKind::kAffine;
  EXPECT_EQ(affine, 5u);
}

TEST(InitModelsTest, NoTargetMeansNoAuxiliary) {
  TableSchema s = testing_util::ToySchema();
  s.columns[1].is_target = false;
  const EncodeResult enc = EncodeTable(testing_util::ToyTable(100, 5), s, 10, 1);
  Rng rng(1);
  Models m = InitModels(enc.state.layout, s, SmallHyper(), rng);
  EXPECT_FALSE(m.has_aux());
  EXPECT_THROW(AuxStep(m, enc.table.data), Error);
}

TEST(StepTest, DiscStepRejectsBatchMismatch) {
  Fixture f;
  Rng rng(1);
  Models m = InitModels(f.enc.state.layout, f.schema, SmallHyper(), rng);
  const ConditionBatch c = SampleConditions(f.enc.state, 4, rng);
  const Tensor real = SampleRealRows(f.enc.table, SampleConditions(f.enc.state, 5, rng), rng);
  EXPECT_THROW(DiscStep(m, real, c.cond, rng), Error);
}

TEST(StepTest, RealRowsMatchTheirConditions) {
  Fixture f;
  Rng rng(2);
  const ConditionBatch c = SampleConditions(f.enc.state, 64, rng);
  const Tensor real = SampleRealRows(f.enc.table, c, rng);
  for (std::size_t r = 0; r < real.rows(); ++r) {
    const Condition& cond = c.conditions[r];
    const ColumnBlock& b = f.enc.state.layout.blocks[cond.column];
    EXPECT_EQ(real(r, b.one_hot_offset + cond.mode), 1.0);
  }
}

TEST(StepTest, EachStepUpdatesOnlyItsNetwork) {
  Fixture f;
  Hyper h = SmallHyper();
  h.sigma = 0.5;
  Rng rng(3), noise(4);
  Models m = InitModels(f.enc.state.layout, f.schema, h, rng);
  PrivacyLedger ledger(h.sanitizer(), h.delta);

  auto g0 = Snapshot(m.generator), d0 = Snapshot(m.discriminator),
       a0 = Snapshot(m.auxiliary);
  const ConditionBatch c = SampleConditions(f.enc.state, h.batch, rng);
  DiscStep(m, SampleRealRows(f.enc.table, c, rng), c.cond, rng);
  EXPECT_FALSE(Changed(g0, Snapshot(m.generator)));
  EXPECT_TRUE(Changed(d0, Snapshot(m.discriminator)));
  EXPECT_FALSE(Changed(a0, Snapshot(m.auxiliary)));
  EXPECT_EQ(ledger.updates(), 0u);

  d0 = Snapshot(m.discriminator);
  AuxStep(m, SampleUniformRows(f.enc.table, h.batch, rng));
  EXPECT_FALSE(Changed(g0, Snapshot(m.generator)));
  EXPECT_FALSE(Changed(d0, Snapshot(m.discriminator)));
  EXPECT_TRUE(Changed(a0, Snapshot(m.auxiliary)));
  EXPECT_EQ(ledger.updates(), 0u);

  a0 = Snapshot(m.auxiliary);
  GenStep(m, ledger, f.enc.state, h, rng, noise);
  EXPECT_TRUE(Changed(g0, Snapshot(m.generator)));
  EXPECT_FALSE(Changed(d0, Snapshot(m.discriminator)));
  EXPECT_FALSE(Changed(a0, Snapshot(m.auxiliary)));
  EXPECT_EQ(ledger.updates(), 1u);
}

TEST(StepTest, NonPrivateGenStepLeavesLedgerEmpty) {
  Fixture f;
  Hyper h = SmallHyper();
  Rng rng(3), noise(4);
  Models m = InitModels(f.enc.state.layout, f.schema, h, rng);
  PrivacyLedger ledger(h.sanitizer(), h.delta);
  for (int i = 0; i < 3; ++i) GenStep(m, ledger, f.enc.state, h, rng, noise);
  EXPECT_EQ(ledger.updates(), 0u);
}

TEST(StepTest, SanitizedBoundaryIsClipped) {
  Fixture f;
  Hyper h = SmallHyper();
  h.clip = 1e-3;
  Rng rng(5), noise(6);
  Models m = InitModels(f.enc.state.layout, f.schema, h, rng);
  PrivacyLedger ledger(h.sanitizer(), h.delta);
  GenStepTrace trace;
  GenStep(m, ledger, f.enc.state, h, rng, noise, &trace);
  EXPECT_GT(trace.boundary_gradient.Norm(), h.sanitizer().bound());
  const double bound = h.sanitizer().bound();
  const double n = trace.boundary_gradient.Norm();
  EXPECT_LE(trace.sanitized_gradient.Norm(), bound + 1e-12);
  EXPECT_NEAR(trace.sanitized_gradient.Norm(), bound * n / (n + 1e-10), 1e-15);
}

TEST(DualPathTest, UnsanitizedGradientMatchesReference) {
  Fixture f;
  Hyper h = SmallHyper();
  h.clip = std::numeric_limits<double>::infinity();
  h.aux_weight = 0.7;
  Rng rng(7), noise(8);
  Models m = InitModels(f.enc.state.layout, f.schema, h, rng);
  // A few warm-up steps so D and A are not at their initial point.
  PrivacyLedger ledger(h.sanitizer(), h.delta);
  for (int i = 0; i < 3; ++i) {
    const ConditionBatch c = SampleConditions(f.enc.state, h.batch, rng);
    DiscStep(m, SampleRealRows(f.enc.table, c, rng), c.cond, rng);
    AuxStep(m, SampleUniformRows(f.enc.table, h.batch, rng));
    GenStep(m, ledger, f.enc.state, h, rng, noise);
  }
  const GeneratorInput in = DrawGeneratorInput(f.enc.state, h.z_dim, h.batch, rng);
  const GeneratorGradients lib =
      ComputeGeneratorGradients(m, in, h.sanitizer(), h.aux_weight, noise);
  const std::vector<Tensor> ref = testing_util::ReferenceGeneratorGradient(m, in, h.aux_weight);
  ASSERT_EQ(lib.trace.generator_gradients.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double diff =
        (lib.trace.generator_gradients[i].mat() - ref[i].mat()).cwiseAbs().maxCoeff();
    EXPECT_LE(diff, 1e-12) << "parameter tensor " << i;
  }
}

TEST(FitTest, SameSeedSameCheckpointAndSamples) {
  Fixture f;
  const Checkpoint a = FitEncoded(f.enc, SmallHyper());
  const Checkpoint b = FitEncoded(f.enc, SmallHyper());
  EXPECT_EQ(Snapshot(a.models.generator), Snapshot(b.models.generator));
  Rng ra(11), rb(11);
  EXPECT_EQ(Sample(a, 50, ra), Sample(b, 50, rb));
}

TEST(FitTest, PrivateFitCountsEveryGeneratorUpdate) {
  Fixture f;
  Hyper h = SmallHyper();
  h.sigma = 1.0;
  std::size_t calls = 0;
  const Checkpoint ck = FitEncoded(f.enc, h, [&](const StepLosses&) { ++calls; });
  EXPECT_EQ(calls, h.steps);
  EXPECT_EQ(ck.ledger.updates(), h.steps);
  EXPECT_EQ(ck.step, h.steps);
}

TEST(FitTest, GeneratedRowsAreValid) {
  Fixture f;
  const Checkpoint ck = FitEncoded(f.enc, SmallHyper());
  Rng rng(12);
  const Tensor raw = Generate(ck, 300, rng);
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (std::size_t slot : ck.codec.layout.AlphaSlots()) {
      EXPECT_LE(std::abs(raw(r, slot)), 1.0);
    }
    for (auto [off, width] : ck.codec.layout.OneHotBlocks()) {
      double sum = 0.0;
      for (std::size_t k = 0; k < width; ++k) sum += raw(r, off + k);
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
  const StringGrid rows = Sample(ck, 300, rng);
  ASSERT_EQ(rows.size(), 300u);
  for (const auto& row : rows) {
    double x = 0;
    EXPECT_TRUE(ParseDouble(row[0], &x));
    EXPECT_TRUE(row[1] == "a" || row[1] == "b");
  }
}

TEST(FitTest, NoiseStreamIsSeeded) {
  Fixture f;
  Hyper h = SmallHyper();
  h.sigma = 2.0;
  const Checkpoint a = FitEncoded(f.enc, h);
  const Checkpoint b = FitEncoded(f.enc, h);
  EXPECT_EQ(Snapshot(a.models.generator), Snapshot(b.models.generator));
  h.os_entropy = true;
  const Checkpoint c = FitEncoded(f.enc, h);
  EXPECT_NE(Snapshot(a.models.generator), Snapshot(c.models.generator));
  EXPECT_EQ(Snapshot(a.models.discriminator).size(),
            Snapshot(c.models.discriminator).size());
}

TEST(HyperTest, ValidateRejectsBadValues) {
  Hyper h = SmallHyper();
  h.aux_hidden = {4, 4, 4};
  EXPECT_THROW(h.Validate(), Error);
  h = SmallHyper();
  h.sigma = 1.0;
  h.clip = std::numeric_limits<double>::infinity();
  EXPECT_THROW(h.Validate(), Error);
  h = SmallHyper();
  h.batch = 1;
  EXPECT_THROW(h.Validate(), Error);
}

}  // namespace
}  // namespace dptab

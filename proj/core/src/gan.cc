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

#include "dptab/gan.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dptab/error.h"

namespace dptab {
namespace {

constexpr std::size_t kGenerateChunk = 512;

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Logits feeding the final activation layer of a network.
const Tensor& Logits(const std::vector<LayerCache>& caches) {
  return caches.back().input;
}

Network BuildGenerator(const EncodedLayout& layout, std::size_t columns,
                       const Hyper& hyper, Rng& rng) {
  Network g;
  std::size_t width = hyper.z_dim + layout.cond_width;
  for (std::size_t h : hyper.gen_hidden) {
    g.Add(MakeAffine(width, h, rng));
    g.Add(MakeLayerNorm(h));
    g.Add(MakeLeakyRelu(h));
    width = h;
  }
  if (hyper.attention) {
    const std::size_t tokens = columns * hyper.token_width;
    g.Add(MakeAffine(width, tokens, rng));
    g.Add(MakeSelfAttention(columns, hyper.token_width, rng));
    width = tokens;
  }
  g.Add(MakeAffine(width, layout.row_width, rng));
  std::vector<ColumnRange> alpha;
  for (std::size_t slot : layout.AlphaSlots()) alpha.push_back({slot, 1});
  if (!alpha.empty()) g.Add(MakeTanh(layout.row_width, std::move(alpha)));
  std::vector<ColumnRange> groups;
  for (auto [offset, width_] : layout.OneHotBlocks()) {
    groups.push_back({offset, width_});
  }
  g.Add(MakeSoftmaxGroup(layout.row_width, std::move(groups)));
  return g;
}

Network BuildDiscriminator(const EncodedLayout& layout, const Hyper& hyper,
                           Rng& rng) {
  Network d;
  std::size_t width = layout.row_width + layout.cond_width;
  for (std::size_t h : hyper.disc_hidden) {
    d.Add(MakeAffine(width, h, rng));
    d.Add(MakeLayerNorm(h));
    d.Add(MakeLeakyRelu(h));
    width = h;
  }
  d.Add(MakeAffine(width, 1, rng));
  d.Add(MakeSigmoid(1));
  return d;
}

Network BuildAuxiliary(const EncodedLayout& layout, const AuxTarget& target,
                       const Hyper& hyper, Rng& rng) {
  Network a;
  std::size_t width = layout.row_width - target.block_width;
  Require(width > 0, "auxiliary classifier: no input features besides the target");
  for (std::size_t h : hyper.aux_hidden) {
    a.Add(MakeAffine(width, h, rng));
    a.Add(MakeLeakyRelu(h));
    width = h;
  }
  a.Add(MakeAffine(width, target.classes, rng));
  a.Add(MakeSoftmaxGroup(target.classes, {{0, target.classes}}));
  return a;
}

std::vector<std::size_t> TargetLabels(const Tensor& rows,
                                      const AuxTarget& target) {
  std::vector<std::size_t> labels(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < target.classes; ++j) {
      if (rows(r, target.one_hot_offset + j) >
          rows(r, target.one_hot_offset + best)) {
        best = j;
      }
    }
    labels[r] = best;
  }
  return labels;
}

// Mean cross-entropy of softmax(logits) against labels; fills the gradient
// with respect to the logits.
double CrossEntropy(const Tensor& logits, const std::vector<std::size_t>& labels,
                    Tensor* d_logits) {
  const std::size_t b = logits.rows();
  const double inv_b = 1.0 / static_cast<double>(b);
  *d_logits = Tensor(b, logits.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double mx = logits.mat().row(static_cast<Eigen::Index>(r)).maxCoeff();
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      sum += std::exp(logits(r, j) - mx);
    }
    const double lse = mx + std::log(sum);
    loss -= logits(r, labels[r]) - lse;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      (*d_logits)(r, j) = std::exp(logits(r, j) - lse) * inv_b;
    }
    (*d_logits)(r, labels[r]) -= inv_b;
  }
  return loss * inv_b;
}

void AddInto(std::vector<Tensor>& acc, const std::vector<Tensor>& more) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i].mat() += more[i].mat();
}

}  // namespace

void Hyper::Validate() const {
  auto bad = [](const std::string& m) { Fail(ErrorCode::kConfig, "hyper: " + m); };
  if (z_dim < 1) bad("z_dim must be >= 1");
  if (batch < 2) bad("batch must be >= 2");
  if (steps < 1) bad("steps must be >= 1");
  if (aux_hidden.size() != 4) bad("aux_hidden must list exactly 4 widths");
  for (const auto* widths : {&gen_hidden, &disc_hidden, &aux_hidden}) {
    for (std::size_t w : *widths) {
      if (w == 0) bad("hidden widths must be positive");
    }
  }
  if (attention && token_width == 0) bad("token_width must be positive");
  if (max_modes < 1) bad("max_modes must be >= 1");
  if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
  if (!(aux_weight >= 0.0)) bad("aux_weight must be non-negative");
  try {
    sanitizer().Validate();
    PrivacyLedger check(sanitizer(), delta, lambda_grid);
  } catch (const Error& e) {
    bad(e.what());
  }
}

Tensor Concat(const Tensor& left, const Tensor& right) {
  Require(left.rows() == right.rows(),
          "concat: row counts " + std::to_string(left.rows()) + " and " +
              std::to_string(right.rows()) + " differ");
  Matrix m(left.mat().rows(), left.mat().cols() + right.mat().cols());
  m << left.mat(), right.mat();
  return Tensor(std::move(m));
}

Tensor StripTarget(const Tensor& encoded, const AuxTarget& target) {
  const auto off = static_cast<Eigen::Index>(target.block_offset);
  const auto w = static_cast<Eigen::Index>(target.block_width);
  const Eigen::Index tail = encoded.mat().cols() - off - w;
  Matrix m(encoded.mat().rows(), off + tail);
  m << encoded.mat().leftCols(off), encoded.mat().rightCols(tail);
  return Tensor(std::move(m));
}

Models InitModels(const EncodedLayout& layout, const TableSchema& schema,
                  const Hyper& hyper, Rng& rng) {
  hyper.Validate();
  if (layout.blocks.size() != schema.size() || layout.row_width == 0) {
    Fail(ErrorCode::kInvalidArgument,
         "init: layout has " + std::to_string(layout.blocks.size()) +
             " column blocks, schema has " + std::to_string(schema.size()));
  }
  Rng g_rng = rng.Fork();
  Rng d_rng = rng.Fork();
  Rng a_rng = rng.Fork();
  Models m;
  m.generator = BuildGenerator(layout, schema.size(), hyper, g_rng);
  m.discriminator = BuildDiscriminator(layout, hyper, d_rng);
  if (auto t = schema.TargetIndex()) {
    const ColumnBlock& b = layout.blocks[*t];
    AuxTarget target{*t, b.offset, b.width(), b.one_hot_offset, b.one_hot_width};
    if (target.classes >= 2) {
      m.aux_target = target;
      m.auxiliary = BuildAuxiliary(layout, target, hyper, a_rng);
    }
  }
  for (OptimState* s : {&m.gen_opt, &m.disc_opt, &m.aux_opt}) {
    s->config.learning_rate = hyper.learning_rate;
  }
  return m;
}

ConditionBatch SampleConditions(const CodecState& codec, std::size_t batch,
                                Rng& rng, ConditionWeighting weighting) {
  ConditionBatch out;
  out.cond = Tensor(batch, codec.layout.cond_width);
  out.conditions.reserve(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    const Condition c = SampleCondition(codec, rng, weighting);
    out.cond(r, c.cond_slot) = 1.0;
    out.conditions.push_back(c);
  }
  return out;
}

Tensor SampleRealRows(const EncodedTable& table, const ConditionBatch& conds,
                      Rng& rng) {
  Tensor rows(conds.conditions.size(), table.data.cols());
  for (std::size_t r = 0; r < conds.conditions.size(); ++r) {
    const Condition& c = conds.conditions[r];
    const auto& matching = table.row_index[c.column][c.mode];
    const std::size_t pick = matching.empty()
                                 ? rng.UniformInt(table.data.rows())
                                 : matching[rng.UniformInt(matching.size())];
    rows.mat().row(static_cast<Eigen::Index>(r)) =
        table.data.mat().row(static_cast<Eigen::Index>(pick));
  }
  return rows;
}

Tensor SampleUniformRows(const EncodedTable& table, std::size_t batch,
                         Rng& rng) {
  Tensor rows(batch, table.data.cols());
  for (std::size_t r = 0; r < batch; ++r) {
    const std::size_t pick = rng.UniformInt(table.data.rows());
    rows.mat().row(static_cast<Eigen::Index>(r)) =
        table.data.mat().row(static_cast<Eigen::Index>(pick));
  }
  return rows;
}

GeneratorInput DrawGeneratorInput(const CodecState& codec, std::size_t z_dim,
                                  std::size_t batch, Rng& rng,
                                  ConditionWeighting weighting) {
  GeneratorInput in;
  in.conds = SampleConditions(codec, batch, rng, weighting);
  in.z = Tensor(batch, z_dim);
  for (double& v : in.z.values()) v = rng.Normal();
  in.input = Concat(in.z, in.conds.cond);
  return in;
}

double DiscStep(Models& models, const Tensor& real_rows, const Tensor& cond,
                Rng& rng) {
  const std::size_t b = real_rows.rows();
  if (cond.rows() != b) {
    Fail(ErrorCode::kInvalidArgument,
         "disc_step: " + std::to_string(b) + " real rows but " +
             std::to_string(cond.rows()) + " condition rows");
  }
  const std::size_t z_dim =
      models.generator.in_width() - cond.cols();
  Tensor z(b, z_dim);
  for (double& v : z.values()) v = rng.Normal();
  const Tensor fake = models.generator.Forward(Concat(z, cond));

  const double inv_b = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  std::vector<Tensor> grads;
  for (int pass = 0; pass < 2; ++pass) {
    const bool real = pass == 0;
    std::vector<LayerCache> caches;
    models.discriminator.Forward(Concat(real ? real_rows : fake, cond), &caches);
    const Tensor& logits = Logits(caches);
    Tensor d_logits(b, 1);
    for (std::size_t r = 0; r < b; ++r) {
      const double z_r = logits(r, 0);
      // -log D for real rows, -log(1 - D) for generated ones.
      loss += (real ? Softplus(-z_r) : Softplus(z_r)) * inv_b;
      d_logits(r, 0) = (Sigmoid(z_r) - (real ? 1.0 : 0.0)) * inv_b;
    }
    std::vector<Tensor> g;
    models.discriminator.Backward(caches, d_logits, &g, 1);
    if (grads.empty()) {
      grads = std::move(g);
    } else {
      AddInto(grads, g);
    }
  }
  AdamUpdate(models.discriminator.Parameters(), grads, models.disc_opt);
  return loss;
}

double AuxStep(Models& models, const Tensor& real_rows) {
  if (!models.has_aux()) {
    Fail(ErrorCode::kInvalidArgument,
         "aux_step: the schema has no (multi-class) target column");
  }
  const AuxTarget& target = *models.aux_target;
  std::vector<LayerCache> caches;
  models.auxiliary.Forward(StripTarget(real_rows, target), &caches);
  Tensor d_logits;
  const double loss =
      CrossEntropy(Logits(caches), TargetLabels(real_rows, target), &d_logits);
  std::vector<Tensor> grads;
  models.auxiliary.Backward(caches, d_logits, &grads, 1);
  AdamUpdate(models.auxiliary.Parameters(), grads, models.aux_opt);
  return loss;
}

GeneratorGradients ComputeGeneratorGradients(const Models& models,
                                             const GeneratorInput& input,
                                             const SanitizerConfig& sanitizer,
                                             double aux_weight,
                                             Rng& noise_rng) {
  const std::size_t b = input.input.rows();
  const double inv_b = 1.0 / static_cast<double>(b);
  GeneratorGradients out;

  std::vector<LayerCache> g_caches;
  const Tensor fake = models.generator.Forward(input.input, &g_caches);
  const std::size_t row_width = fake.cols();

  // Adversarial part: non-saturating -log D(G(z)).
  std::vector<LayerCache> d_caches;
  models.discriminator.Forward(Concat(fake, input.conds.cond), &d_caches);
  const Tensor& logits = Logits(d_caches);
  Tensor d_logits(b, 1);
  for (std::size_t r = 0; r < b; ++r) {
    out.loss += Softplus(-logits(r, 0)) * inv_b;
    d_logits(r, 0) = (Sigmoid(logits(r, 0)) - 1.0) * inv_b;
  }
  const Tensor d_disc_in =
      models.discriminator.Backward(d_caches, d_logits, nullptr, 1);
  Tensor boundary(Matrix(d_disc_in.mat().leftCols(
      static_cast<Eigen::Index>(row_width))));

  // Auxiliary part: A's prediction on the generated row against the
  // conditioned target class, or the generated target class otherwise.
  if (models.has_aux() && aux_weight > 0.0) {
    const AuxTarget& target = *models.aux_target;
    std::vector<std::size_t> labels = TargetLabels(fake, target);
    for (std::size_t r = 0; r < b; ++r) {
      const Condition& c = input.conds.conditions[r];
      if (c.column == target.column) labels[r] = c.mode;
    }
    std::vector<LayerCache> a_caches;
    models.auxiliary.Forward(StripTarget(fake, target), &a_caches);
    Tensor d_aux_logits;
    out.loss += aux_weight * CrossEntropy(Logits(a_caches), labels, &d_aux_logits);
    const Tensor d_aux_in =
        models.auxiliary.Backward(a_caches, d_aux_logits, nullptr, 1);
    const auto off = static_cast<Eigen::Index>(target.block_offset);
    const auto w = static_cast<Eigen::Index>(target.block_width);
    const Eigen::Index tail = static_cast<Eigen::Index>(row_width) - off - w;
    boundary.mat().leftCols(off) += aux_weight * d_aux_in.mat().leftCols(off);
    boundary.mat().rightCols(tail) += aux_weight * d_aux_in.mat().rightCols(tail);
  }

  out.trace.boundary_gradient = boundary;
  out.trace.sanitized_gradient = Sanitize(boundary, sanitizer, noise_rng);
  models.generator.Backward(g_caches, out.trace.sanitized_gradient,
                            &out.trace.generator_gradients);
  return out;
}

double GenStep(Models& models, PrivacyLedger& ledger, const CodecState& codec,
               const Hyper& hyper, Rng& rng, Rng& noise_rng,
               GenStepTrace* trace) {
  const GeneratorInput input =
      DrawGeneratorInput(codec, hyper.z_dim, hyper.batch, rng);
  GeneratorGradients g = ComputeGeneratorGradients(
      models, input, ledger.config(), hyper.aux_weight, noise_rng);
  AdamUpdate(models.generator.Parameters(), g.trace.generator_gradients,
             models.gen_opt);
  if (ledger.is_private()) ledger.RecordUpdate();
  if (trace != nullptr) *trace = std::move(g.trace);
  return g.loss;
}

Checkpoint FitEncoded(const EncodeResult& encoded, const Hyper& hyper,
                      const StepCallback& on_step) {
  hyper.Validate();
  Rng master(hyper.seed);
  Rng init_rng = master.Fork();
  Rng train_rng = master.Fork();
  Rng noise_rng = hyper.os_entropy ? Rng::FromOsEntropy() : master.Fork();

  Checkpoint ck;
  ck.hyper = hyper;
  ck.codec = encoded.state;
  ck.models = InitModels(encoded.state.layout, encoded.state.schema, hyper,
                         init_rng);
  ck.ledger = PrivacyLedger(hyper.sanitizer(), hyper.delta, hyper.lambda_grid);

  const EncodedTable& table = encoded.table;
  for (std::size_t step = 1; step <= hyper.steps; ++step) {
    StepLosses losses;
    losses.step = step;
    const ConditionBatch conds =
        SampleConditions(ck.codec, hyper.batch, train_rng);
    const Tensor real = SampleRealRows(table, conds, train_rng);
    losses.disc = DiscStep(ck.models, real, conds.cond, train_rng);
    if (ck.models.has_aux()) {
      losses.aux = AuxStep(ck.models,
                           SampleUniformRows(table, hyper.batch, train_rng));
    }
    losses.gen = GenStep(ck.models, ck.ledger, ck.codec, hyper, train_rng,
                         noise_rng);
    ck.step = step;
    if (on_step) on_step(losses);
  }
  return ck;
}

Checkpoint Fit(const StringGrid& raw, const TableSchema& schema,
               const Hyper& hyper, const StepCallback& on_step) {
  hyper.Validate();
  return FitEncoded(EncodeTable(raw, schema, hyper.max_modes, hyper.seed),
                    hyper, on_step);
}

Tensor Generate(const Checkpoint& checkpoint, std::size_t n, Rng& rng) {
  Require(n >= 1, "sample: n must be >= 1");
  const std::size_t width = checkpoint.codec.layout.row_width;
  Tensor out(n, width);
  for (std::size_t start = 0; start < n; start += kGenerateChunk) {
    const std::size_t count = std::min(kGenerateChunk, n - start);
    const GeneratorInput in =
        DrawGeneratorInput(checkpoint.codec, checkpoint.hyper.z_dim, count, rng,
                           ConditionWeighting::kFrequency);
    const Tensor rows = checkpoint.models.generator.Forward(in.input);
    out.mat().middleRows(static_cast<Eigen::Index>(start),
                         static_cast<Eigen::Index>(count)) = rows.mat();
  }
  return out;
}

StringGrid Sample(const Checkpoint& checkpoint, std::size_t n, Rng& rng) {
  return DecodeTable(Generate(checkpoint, n, rng), checkpoint.codec);
}

}  // namespace dptab

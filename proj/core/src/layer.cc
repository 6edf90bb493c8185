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

#include "dptab/layer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dptab/error.h"

namespace dptab {
namespace {

using RowMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const Matrix>;

std::string Dims(const Tensor& t) { return t.ShapeString(); }

void CheckInput(const Layer& layer, const Tensor& input) {
  if (input.rows() == 0) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(LayerKindName(layer.kind)) + ": empty batch");
  }
  if (input.cols() != layer.config.in_width) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(LayerKindName(layer.kind)) + ": input " + Dims(input) +
             " does not match expected width " +
             std::to_string(layer.config.in_width));
  }
}

void CheckRanges(const std::vector<ColumnRange>& ranges, std::size_t width) {
  std::size_t end = 0;
  for (const ColumnRange& r : ranges) {
    Require(r.width > 0, "column range of width 0");
    Require(r.offset >= end, "column ranges overlap or are unordered");
    end = r.offset + r.width;
    Require(end <= width, "column range exceeds layer width");
  }
}

Tensor RandomNormal(std::size_t rows, std::size_t cols, double stddev,
                    Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.Normal() * stddev;
  return t;
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---- affine ---------------------------------------------------------------

ForwardResult AffineForward(const Layer& layer, const Tensor& x) {
  const Matrix& w = layer.params[0].mat();
  const Matrix& b = layer.params[1].mat();
  Tensor y(Matrix((x.mat() * w).rowwise() + b.row(0)));
  return {y, {true, layer.kind, x, {}, {}}};
}

BackwardResult AffineBackward(const Layer& layer, const LayerCache& cache,
                              const Tensor& dy) {
  const Matrix& w = layer.params[0].mat();
  BackwardResult out;
  out.d_input = Tensor(Matrix(dy.mat() * w.transpose()));
  out.d_params.emplace_back(Matrix(cache.input.mat().transpose() * dy.mat()));
  out.d_params.emplace_back(Matrix(dy.mat().colwise().sum()));
  return out;
}

// ---- elementwise ----------------------------------------------------------

ForwardResult LeakyReluForward(const Layer& layer, const Tensor& x) {
  const double slope = layer.config.leak_slope;
  Tensor y(Matrix(x.mat().unaryExpr(
      [slope](double v) { return v > 0 ? v : slope * v; })));
  return {y, {true, layer.kind, x, {}, {}}};
}

BackwardResult LeakyReluBackward(const Layer& layer, const LayerCache& cache,
                                 const Tensor& dy) {
  const double slope = layer.config.leak_slope;
  Matrix d = dy.mat().binaryExpr(cache.input.mat(), [slope](double g, double v) {
    return v > 0 ? g : slope * g;
  });
  return {Tensor(std::move(d)), {}};
}

// Columns a tanh layer acts on; empty config range list means all columns.
std::vector<ColumnRange> TanhRanges(const Layer& layer) {
  if (layer.config.ranges.empty()) return {{0, layer.config.in_width}};
  return layer.config.ranges;
}

ForwardResult TanhForward(const Layer& layer, const Tensor& x) {
  Tensor y = x;
  for (const ColumnRange& r : TanhRanges(layer)) {
    auto block = y.mat().middleCols(static_cast<Eigen::Index>(r.offset),
                                    static_cast<Eigen::Index>(r.width));
    block = block.array().tanh().matrix();
  }
  return {y, {true, layer.kind, {}, y, {}}};
}

BackwardResult TanhBackward(const Layer& layer, const LayerCache& cache,
                            const Tensor& dy) {
  Tensor dx = dy;
  for (const ColumnRange& r : TanhRanges(layer)) {
    const auto off = static_cast<Eigen::Index>(r.offset);
    const auto w = static_cast<Eigen::Index>(r.width);
    auto y = cache.output.mat().middleCols(off, w).array();
    dx.mat().middleCols(off, w) =
        (dy.mat().middleCols(off, w).array() * (1.0 - y * y)).matrix();
  }
  return {std::move(dx), {}};
}

ForwardResult SigmoidForward(const Layer& layer, const Tensor& x) {
  Tensor y(Matrix(x.mat().unaryExpr(&StableSigmoid)));
  return {y, {true, layer.kind, {}, y, {}}};
}

BackwardResult SigmoidBackward(const Layer&, const LayerCache& cache,
                               const Tensor& dy) {
  auto y = cache.output.mat().array();
  return {Tensor(Matrix((dy.mat().array() * y * (1.0 - y)).matrix())), {}};
}

// ---- grouped softmax ------------------------------------------------------

ForwardResult SoftmaxGroupForward(const Layer& layer, const Tensor& x) {
  Tensor y = x;
  for (const ColumnRange& g : layer.config.ranges) {
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < g.width; ++j) {
        mx = std::max(mx, x(r, g.offset + j));
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < g.width; ++j) {
        const double e = std::exp(x(r, g.offset + j) - mx);
        y(r, g.offset + j) = e;
        sum += e;
      }
      for (std::size_t j = 0; j < g.width; ++j) y(r, g.offset + j) /= sum;
    }
  }
  return {y, {true, layer.kind, {}, y, {}}};
}

BackwardResult SoftmaxGroupBackward(const Layer& layer,
                                    const LayerCache& cache,
                                    const Tensor& dy) {
  Tensor dx = dy;
  const Tensor& y = cache.output;
  for (const ColumnRange& g : layer.config.ranges) {
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.width; ++j) {
        dot += dy(r, g.offset + j) * y(r, g.offset + j);
      }
      for (std::size_t j = 0; j < g.width; ++j) {
        const std::size_t c = g.offset + j;
        dx(r, c) = y(r, c) * (dy(r, c) - dot);
      }
    }
  }
  return {std::move(dx), {}};
}

// ---- layer norm -----------------------------------------------------------
// extra = {xhat (batch, width), inv_std (batch, 1)}

ForwardResult LayerNormForward(const Layer& layer, const Tensor& x) {
  const auto n = static_cast<double>(x.cols());
  const double eps = layer.config.norm_epsilon;
  Tensor xhat(x.rows(), x.cols());
  Tensor inv_std(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.mat().row(static_cast<Eigen::Index>(r)).array();
    const double mean = row.sum() / n;
    const double var = (row - mean).square().sum() / n;
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std(r, 0) = inv;
    xhat.mat().row(static_cast<Eigen::Index>(r)) =
        ((row - mean) * inv).matrix();
  }
  const Matrix& gain = layer.params[0].mat();
  const Matrix& bias = layer.params[1].mat();
  Tensor y(Matrix(
      (xhat.mat().array().rowwise() * gain.row(0).array()).matrix().rowwise() +
      bias.row(0)));
  return {y, {true, layer.kind, x, {}, {xhat, inv_std}}};
}

BackwardResult LayerNormBackward(const Layer& layer, const LayerCache& cache,
                                 const Tensor& dy) {
  const Tensor& xhat = cache.extra[0];
  const Tensor& inv_std = cache.extra[1];
  const Matrix& gain = layer.params[0].mat();
  const auto n = static_cast<double>(dy.cols());

  Matrix dxhat = (dy.mat().array().rowwise() * gain.row(0).array()).matrix();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.mat().rows(); ++r) {
    const double sum_d = dxhat.row(r).sum();
    const double sum_dx = dxhat.row(r).dot(xhat.mat().row(r));
    dx.row(r) = (inv_std.mat()(r, 0) / n) *
                (n * dxhat.row(r).array() - sum_d -
                 xhat.mat().row(r).array() * sum_dx)
                    .matrix();
  }
  BackwardResult out;
  out.d_input = Tensor(std::move(dx));
  out.d_params.emplace_back(
      Matrix((dy.mat().array() * xhat.mat().array()).colwise().sum()));
  out.d_params.emplace_back(Matrix(dy.mat().colwise().sum()));
  return out;
}

// ---- self attention -------------------------------------------------------
// Each input row is `token_count` tokens of `token_width` features. Single
// head, no positional encoding, so the map is permutation-equivariant.
// extra = {Q, K, V, H} as (batch, n*d) and P as (batch, n*n)

ForwardResult SelfAttentionForward(const Layer& layer, const Tensor& x) {
  const auto n = static_cast<Eigen::Index>(layer.config.token_count);
  const auto d = static_cast<Eigen::Index>(layer.config.token_width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix& wq = layer.params[0].mat();
  const Matrix& wk = layer.params[1].mat();
  const Matrix& wv = layer.params[2].mat();
  const Matrix& wo = layer.params[3].mat();

  const std::size_t batch = x.rows();
  Tensor q(batch, x.cols()), k(batch, x.cols()), v(batch, x.cols()),
      h(batch, x.cols()), y(batch, x.cols());
  Tensor p(batch, static_cast<std::size_t>(n * n));
  for (std::size_t b = 0; b < batch; ++b) {
    const auto off = static_cast<Eigen::Index>(b) * n * d;
    ConstRowMap xb(x.mat().data() + off, n, d);
    RowMap qb(q.mat().data() + off, n, d);
    RowMap kb(k.mat().data() + off, n, d);
    RowMap vb(v.mat().data() + off, n, d);
    RowMap hb(h.mat().data() + off, n, d);
    RowMap yb(y.mat().data() + off, n, d);
    RowMap pb(p.mat().data() + static_cast<Eigen::Index>(b) * n * n, n, n);
    qb.noalias() = xb * wq;
    kb.noalias() = xb * wk;
    vb.noalias() = xb * wv;
    pb.noalias() = (qb * kb.transpose()) * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = pb.row(i).maxCoeff();
      pb.row(i) = (pb.row(i).array() - mx).exp().matrix();
      pb.row(i) /= pb.row(i).sum();
    }
    hb.noalias() = pb * vb;
    yb.noalias() = hb * wo;
  }
  return {y, {true, layer.kind, x, {}, {q, k, v, h, p}}};
}

BackwardResult SelfAttentionBackward(const Layer& layer,
                                     const LayerCache& cache,
                                     const Tensor& dy) {
  const auto n = static_cast<Eigen::Index>(layer.config.token_count);
  const auto d = static_cast<Eigen::Index>(layer.config.token_width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix& wq = layer.params[0].mat();
  const Matrix& wk = layer.params[1].mat();
  const Matrix& wv = layer.params[2].mat();
  const Matrix& wo = layer.params[3].mat();
  const Tensor& x = cache.input;
  const Tensor& q = cache.extra[0];
  const Tensor& k = cache.extra[1];
  const Tensor& v = cache.extra[2];
  const Tensor& h = cache.extra[3];
  const Tensor& p = cache.extra[4];

  Matrix dwq = Matrix::Zero(d, d), dwk = Matrix::Zero(d, d),
         dwv = Matrix::Zero(d, d), dwo = Matrix::Zero(d, d);
  Tensor dx(x.rows(), x.cols());
  Matrix dh(n, d), dp(n, n), ds(n, n), dq(n, d), dk(n, d), dv(n, d);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto off = static_cast<Eigen::Index>(b) * n * d;
    ConstRowMap xb(x.mat().data() + off, n, d);
    ConstRowMap qb(q.mat().data() + off, n, d);
    ConstRowMap kb(k.mat().data() + off, n, d);
    ConstRowMap vb(v.mat().data() + off, n, d);
    ConstRowMap hb(h.mat().data() + off, n, d);
    ConstRowMap dyb(dy.mat().data() + off, n, d);
    ConstRowMap pb(p.mat().data() + static_cast<Eigen::Index>(b) * n * n, n,
                   n);
    RowMap dxb(dx.mat().data() + off, n, d);

    dwo.noalias() += hb.transpose() * dyb;
    dh.noalias() = dyb * wo.transpose();
    dp.noalias() = dh * vb.transpose();
    dv.noalias() = pb.transpose() * dh;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dot = dp.row(i).dot(pb.row(i));
      ds.row(i) = (pb.row(i).array() * (dp.row(i).array() - dot)).matrix();
    }
    ds *= scale;
    dq.noalias() = ds * kb;
    dk.noalias() = ds.transpose() * qb;
    dwq.noalias() += xb.transpose() * dq;
    dwk.noalias() += xb.transpose() * dk;
    dwv.noalias() += xb.transpose() * dv;
    dxb.noalias() =
        dq * wq.transpose() + dk * wk.transpose() + dv * wv.transpose();
  }
  BackwardResult out;
  out.d_input = std::move(dx);
  out.d_params.emplace_back(std::move(dwq));
  out.d_params.emplace_back(std::move(dwk));
  out.d_params.emplace_back(std::move(dwv));
  out.d_params.emplace_back(std::move(dwo));
  return out;
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kAffine: return "affine";
    case LayerKind::kLeakyRelu: return "leaky_relu";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kSoftmaxGroup: return "softmax_group";
    case LayerKind::kLayerNorm: return "layer_norm";
    case LayerKind::kSelfAttention: return "self_attention";
  }
  return "unknown";
}

LayerKind LayerKindFromName(std::string_view name) {
  for (LayerKind k :
       {LayerKind::kAffine, LayerKind::kLeakyRelu, LayerKind::kTanh,
        LayerKind::kSigmoid, LayerKind::kSoftmaxGroup, LayerKind::kLayerNorm,
        LayerKind::kSelfAttention}) {
    if (LayerKindName(k) == name) return k;
  }
  Fail(ErrorCode::kIntegrity, "unknown layer kind '" + std::string(name) + "'");
}

Layer MakeAffine(std::size_t in, std::size_t out, Rng& rng) {
  Require(in > 0 && out > 0, "affine: zero width");
  const double stddev = 1.0 / std::sqrt(static_cast<double>(in));
  return MakeAffine(RandomNormal(in, out, stddev, rng), Tensor(1, out));
}

Layer MakeAffine(Tensor weight, Tensor bias) {
  Require(bias.rows() == 1 && bias.cols() == weight.cols(),
          "affine: bias " + Dims(bias) + " does not match weight " +
              Dims(weight));
  Layer l;
  l.kind = LayerKind::kAffine;
  l.config.in_width = weight.rows();
  l.config.out_width = weight.cols();
  l.params = {std::move(weight), std::move(bias)};
  return l;
}

Layer MakeLeakyRelu(std::size_t width, double slope) {
  Layer l;
  l.kind = LayerKind::kLeakyRelu;
  l.config.in_width = l.config.out_width = width;
  l.config.leak_slope = slope;
  return l;
}

Layer MakeTanh(std::size_t width, std::vector<ColumnRange> active) {
  CheckRanges(active, width);
  Layer l;
  l.kind = LayerKind::kTanh;
  l.config.in_width = l.config.out_width = width;
  l.config.ranges = std::move(active);
  return l;
}

Layer MakeSigmoid(std::size_t width) {
  Layer l;
  l.kind = LayerKind::kSigmoid;
  l.config.in_width = l.config.out_width = width;
  return l;
}

Layer MakeSoftmaxGroup(std::size_t width, std::vector<ColumnRange> groups) {
  CheckRanges(groups, width);
  Layer l;
  l.kind = LayerKind::kSoftmaxGroup;
  l.config.in_width = l.config.out_width = width;
  l.config.ranges = std::move(groups);
  return l;
}

Layer MakeLayerNorm(std::size_t width) {
  Require(width > 0, "layer_norm: zero width");
  Layer l;
  l.kind = LayerKind::kLayerNorm;
  l.config.in_width = l.config.out_width = width;
  l.params = {Tensor(1, width, 1.0), Tensor(1, width, 0.0)};
  return l;
}

Layer MakeSelfAttention(std::size_t token_count, std::size_t token_width,
                        Rng& rng) {
  Require(token_count > 0 && token_width > 0, "self_attention: zero size");
  Layer l;
  l.kind = LayerKind::kSelfAttention;
  l.config.token_count = token_count;
  l.config.token_width = token_width;
  l.config.in_width = l.config.out_width = token_count * token_width;
  const double stddev = 1.0 / std::sqrt(static_cast<double>(token_width));
  for (int i = 0; i < 4; ++i) {
    l.params.push_back(RandomNormal(token_width, token_width, stddev, rng));
  }
  return l;
}

ForwardResult Forward(const Layer& layer, const Tensor& input) {
  CheckInput(layer, input);
  ForwardResult r;
  switch (layer.kind) {
    case LayerKind::kAffine: r = AffineForward(layer, input); break;
    case LayerKind::kLeakyRelu: r = LeakyReluForward(layer, input); break;
    case LayerKind::kTanh: r = TanhForward(layer, input); break;
    case LayerKind::kSigmoid: r = SigmoidForward(layer, input); break;
    case LayerKind::kSoftmaxGroup: r = SoftmaxGroupForward(layer, input); break;
    case LayerKind::kLayerNorm: r = LayerNormForward(layer, input); break;
    case LayerKind::kSelfAttention:
      r = SelfAttentionForward(layer, input);
      break;
  }
  r.cache.input = input;
  r.cache.output = r.output;
  CheckFinite(r.output, std::string(LayerKindName(layer.kind)) + " forward");
  return r;
}

BackwardResult Backward(const Layer& layer, const LayerCache& cache,
                        const Tensor& d_output) {
  const std::string name(LayerKindName(layer.kind));
  if (!cache.valid) Fail(ErrorCode::kInvalidArgument, name + ": missing cache");
  if (cache.kind != layer.kind) {
    Fail(ErrorCode::kInvalidArgument,
         name + ": cache was produced by a " +
             std::string(LayerKindName(cache.kind)) + " layer");
  }
  if (cache.input.cols() != layer.config.in_width) {
    Fail(ErrorCode::kInvalidArgument, name + ": stale cache " +
                                          Dims(cache.input) +
                                          " for this layer");
  }
  if (!d_output.SameShape(cache.output)) {
    Fail(ErrorCode::kInvalidArgument,
         name + ": d_output " + Dims(d_output) + " does not match output " +
             Dims(cache.output));
  }
  BackwardResult r;
  switch (layer.kind) {
    case LayerKind::kAffine: r = AffineBackward(layer, cache, d_output); break;
    case LayerKind::kLeakyRelu:
      r = LeakyReluBackward(layer, cache, d_output);
      break;
    case LayerKind::kTanh: r = TanhBackward(layer, cache, d_output); break;
    case LayerKind::kSigmoid: r = SigmoidBackward(layer, cache, d_output); break;
    case LayerKind::kSoftmaxGroup:
      r = SoftmaxGroupBackward(layer, cache, d_output);
      break;
    case LayerKind::kLayerNorm:
      r = LayerNormBackward(layer, cache, d_output);
      break;
    case LayerKind::kSelfAttention:
      r = SelfAttentionBackward(layer, cache, d_output);
      break;
  }
  CheckFinite(r.d_input, name + " backward");
  return r;
}

double GradCheck(const Layer& layer, int trials, std::uint64_t seed) {
  Require(trials >= 1, "GradCheck: trials must be >= 1");
  constexpr double kStep = 1e-5;
  constexpr std::size_t kBatch = 3;
  Rng rng(seed);

  auto relative_error = [](double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    return std::abs(analytic - numeric) / scale;
  };

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Tensor x = RandomNormal(kBatch, layer.config.in_width, 1.0, rng);
    Tensor probe = RandomNormal(kBatch, layer.config.out_width, 1.0, rng);
    Layer work = layer;

    auto loss = [&]() {
      const Tensor y = Forward(work, x).output;
      return (y.mat().array() * probe.mat().array()).sum();
    };

    const ForwardResult fwd = Forward(work, x);
    const BackwardResult bwd = Backward(work, fwd.cache, probe);

    for (std::size_t i = 0; i < x.size(); ++i) {
      double& v = x.values()[i];
      const double saved = v;
      v = saved + kStep;
      const double up = loss();
      v = saved - kStep;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      worst = std::max(worst,
                       relative_error(bwd.d_input.values()[i], numeric));
    }
    for (std::size_t p = 0; p < work.params.size(); ++p) {
      for (std::size_t i = 0; i < work.params[p].size(); ++i) {
        double& v = work.params[p].values()[i];
        const double saved = v;
        v = saved + kStep;
        const double up = loss();
        v = saved - kStep;
        const double down = loss();
        v = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        worst = std::max(
            worst, relative_error(bwd.d_params[p].values()[i], numeric));
      }
    }
  }
  return worst;
}

}  // namespace dptab

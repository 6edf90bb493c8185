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

#include "dptab/vgm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "dptab/error.h"
#include "dptab/rng.h"

namespace dptab {
namespace {

constexpr int kMaxEmIterations = 500;
constexpr double kEmTolerance = 1e-10;

struct Mixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

double LogNormalDensity(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

// k-means++ seeding: first centre uniform, the rest proportional to the
// squared distance to the nearest chosen centre.
std::vector<double> SeedCentres(std::span<const double> values, std::size_t k,
                                Rng& rng) {
  std::vector<double> centres;
  centres.push_back(values[rng.UniformInt(values.size())]);
  std::vector<double> dist(values.size());
  while (centres.size() < k) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centres) best = std::min(best, (values[i] - c) * (values[i] - c));
      dist[i] = best;
    }
    if (std::all_of(dist.begin(), dist.end(), [](double d) { return d == 0.0; })) {
      break;
    }
    centres.push_back(values[rng.Categorical(dist)]);
  }
  return centres;
}

Mixture RunEm(std::span<const double> values, std::vector<double> centres,
              double std_floor, double data_std) {
  const std::size_t n = values.size();
  const std::size_t k = centres.size();
  Mixture m;
  m.means = std::move(centres);
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.stds.assign(k, std::max(data_std / static_cast<double>(k), std_floor));

  std::vector<double> resp(n * k);
  std::vector<double> logp(k);
  for (int iter = 0; iter < kMaxEmIterations; ++iter) {
    // E step.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        logp[j] = std::log(m.weights[j]) +
                  LogNormalDensity(values[i], m.means[j], m.stds[j]);
        mx = std::max(mx, logp[j]);
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += std::exp(logp[j] - mx);
      const double lse = mx + std::log(sum);
      ll += lse;
      for (std::size_t j = 0; j < k; ++j) {
        resp[i * k + j] = std::exp(logp[j] - lse);
      }
    }
    const double previous = m.log_likelihood;
    m.log_likelihood = ll;

    // M step.
    for (std::size_t j = 0; j < k; ++j) {
      double nk = 0.0, sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + j];
        sx += resp[i * k + j] * values[i];
      }
      if (nk < 1e-12) {
        // Starved component: park it with negligible weight.
        m.weights[j] = 1e-300;
        continue;
      }
      const double mean = sx / nk;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mean;
        sv += resp[i * k + j] * d * d;
      }
      m.weights[j] = nk / static_cast<double>(n);
      m.means[j] = mean;
      m.stds[j] = std::max(std::sqrt(sv / nk), std_floor);
    }
    if (std::abs(ll - previous) <= kEmTolerance * std::abs(ll)) break;
  }
  return m;
}

}  // namespace

VgmModel FitVgm(std::span<const double> values, std::size_t max_modes,
                std::uint64_t seed) {
  Require(max_modes >= 1, "FitVgm: max_modes must be >= 1");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t distinct = static_cast<std::size_t>(
      std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  if (distinct < 2) {
    Fail(ErrorCode::kData,
         "degenerate column: fewer than two distinct values (declare it "
         "categorical instead)");
  }
  for (double v : values) {
    if (!std::isfinite(v)) Fail(ErrorCode::kData, "FitVgm: non-finite value");
  }

  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double data_std = std::sqrt(var / n);
  const double std_floor = std::max(kMinModeStd, 1e-3 * data_std);

  Rng rng(seed);
  Mixture best;
  double best_bic = std::numeric_limits<double>::infinity();
  int worse_in_a_row = 0;
  const std::size_t max_k = std::min(max_modes, distinct);
  for (std::size_t k = 1; k <= max_k; ++k) {
    Rng order_rng = rng.Fork();
    Mixture m = RunEm(values, SeedCentres(values, k, order_rng), std_floor,
                      data_std);
    const double params = 3.0 * static_cast<double>(m.means.size()) - 1.0;
    const double bic = -2.0 * m.log_likelihood + params * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(m);
      worse_in_a_row = 0;
    } else if (++worse_in_a_row >= 2) {
      break;
    }
  }

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < best.weights.size(); ++j) {
    if (best.weights[j] >= kModeWeightThreshold) keep.push_back(j);
  }
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return best.means[a] < best.means[b];
  });
  VgmModel model;
  double total = 0.0;
  for (std::size_t j : keep) total += best.weights[j];
  for (std::size_t j : keep) {
    model.weights.push_back(best.weights[j] / total);
    model.means.push_back(best.means[j]);
    model.stds.push_back(std::max(best.stds[j], kMinModeStd));
  }
  return model;
}

EncodedValue EncodeValue(double value, const VgmModel& model) {
  for (std::size_t s = 0; s < model.singular_modes.size(); ++s) {
    if (std::abs(value - model.singular_modes[s]) <= kSingularTolerance) {
      return {0.0, s};
    }
  }
  Require(model.gaussian_count() > 0,
          "EncodeValue: value matches no singular mode and the model has no "
          "Gaussian modes");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.gaussian_count(); ++k) {
    const double score = std::log(model.weights[k]) +
                         LogNormalDensity(value, model.means[k], model.stds[k]);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  const double alpha = std::clamp(
      (value - model.means[best]) / (4.0 * model.stds[best]), -1.0, 1.0);
  return {alpha, model.singular_modes.size() + best};
}

double DecodeValue(double alpha, std::size_t mode, const VgmModel& model) {
  Require(mode < model.mode_count(),
          "DecodeValue: mode " + std::to_string(mode) + " out of range");
  if (model.IsSingular(mode)) return model.singular_modes[mode];
  const std::size_t k = mode - model.singular_modes.size();
  return 4.0 * model.stds[k] * alpha + model.means[k];
}

double DecodeValue(double alpha, std::span<const double> one_hot,
                   const VgmModel& model) {
  Require(one_hot.size() == model.mode_count(),
          "DecodeValue: mode vector has width " +
              std::to_string(one_hot.size()) + ", model has " +
              std::to_string(model.mode_count()) + " modes");
  std::size_t mode = one_hot.size();
  for (std::size_t i = 0; i < one_hot.size(); ++i) {
    if (one_hot[i] == 1.0) {
      Require(mode == one_hot.size(), "DecodeValue: more than one active mode");
      mode = i;
    } else {
      Require(one_hot[i] == 0.0, "DecodeValue: mode vector is not one-hot");
    }
  }
  Require(mode < one_hot.size(), "DecodeValue: no active mode");
  return DecodeValue(alpha, mode, model);
}

}  // namespace dptab

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

#include "dptab/privacy.h"

#include <cmath>
#include <limits>
#include <string>

#include "dptab/error.h"

namespace dptab {
namespace {

constexpr double kMaxSigma = 1e6;
constexpr double kCalibrationAccuracy = 1e-3;

void ValidateGrid(const std::vector<int>& grid) {
  Require(!grid.empty(), "privacy: empty lambda grid");
  for (int l : grid) Require(l >= 2, "privacy: lambda grid entries must be >= 2");
}

}  // namespace

void SanitizerConfig::Validate() const {
  Require(clip > 0.0 && !std::isnan(clip), "sanitizer: clip must be positive");
  Require(batch >= 1, "sanitizer: batch must be >= 1");
  Require(sigma >= 0.0 && std::isfinite(sigma),
          "sanitizer: sigma must be a non-negative number");
  Require(std::isfinite(clip) || sigma == 0.0,
          "sanitizer: an unbounded clip requires sigma = 0");
}

Tensor Sanitize(const Tensor& gradient, const SanitizerConfig& config,
                Rng& rng) {
  config.Validate();
  CheckFinite(gradient, "sanitize");
  const double bound = config.bound();
  const double coef = std::min(bound / (gradient.Norm() + kNormGuard), 1.0);
  Tensor out(Matrix(coef * gradient.mat()));
  if (config.sigma > 0.0) {
    const double scale = bound * config.sigma;
    for (double& v : out.values()) v += scale * rng.Normal();
  }
  return out;
}

std::vector<int> DefaultLambdaGrid() {
  std::vector<int> grid;
  for (int l = 2; l <= 128; ++l) grid.push_back(l);
  return grid;
}

double RdpPerUpdate(std::size_t batch, double sigma, double lambda) {
  return 2.0 * static_cast<double>(batch) * lambda / (sigma * sigma);
}

EpsilonResult ComputeEpsilon(std::uint64_t updates, std::size_t batch,
                             double sigma, double delta,
                             const std::vector<int>& lambda_grid) {
  ValidateGrid(lambda_grid);
  Require(sigma > 0.0, "epsilon: sigma must be positive");
  Require(delta > 0.0 && delta < 1.0, "epsilon: delta must be in (0, 1)");
  Require(batch >= 1, "epsilon: batch must be >= 1");
  EpsilonResult best{std::numeric_limits<double>::infinity(), 0};
  const double log_inv_delta = std::log(1.0 / delta);
  for (int order : lambda_grid) {
    const double lambda = order;
    const double eps =
        static_cast<double>(updates) * RdpPerUpdate(batch, sigma, lambda) +
        log_inv_delta / (lambda - 1.0);
    if (eps < best.epsilon) best = {eps, order};
  }
  return best;
}

double CalibrateSigma(double target_epsilon, double delta,
                      std::uint64_t updates, std::size_t batch,
                      const std::vector<int>& lambda_grid) {
  Require(target_epsilon > 0.0, "calibrate: target epsilon must be positive");
  auto eps = [&](double sigma) {
    return ComputeEpsilon(updates, batch, sigma, delta, lambda_grid).epsilon;
  };
  // Bracket the answer: eps(lo) > target >= eps(hi), hi = 2 lo.
  double hi = 1.0;
  if (eps(hi) > target_epsilon) {
    while (eps(hi) > target_epsilon) {
      hi *= 2.0;
      if (hi > kMaxSigma) {
        Fail(ErrorCode::kInvalidArgument,
             "calibrate: epsilon " + std::to_string(target_epsilon) +
                 " is unreachable with sigma <= 1e6");
      }
    }
  } else {
    while (eps(hi / 2.0) <= target_epsilon) {
      hi /= 2.0;
      if (hi < 1e-12) return hi;
    }
  }
  double lo = hi / 2.0;
  // Invariant: eps(lo) > target >= eps(hi).
  while (hi - lo > 0.5 * kCalibrationAccuracy * hi) {
    const double mid = 0.5 * (lo + hi);
    if (eps(mid) <= target_epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

PrivacyLedger::PrivacyLedger(SanitizerConfig config, double delta,
                             std::vector<int> lambda_grid,
                             std::uint64_t updates)
    : config_(config),
      delta_(delta),
      lambda_grid_(std::move(lambda_grid)),
      updates_(updates) {
  config_.Validate();
  ValidateGrid(lambda_grid_);
  Require(delta_ > 0.0 && delta_ < 1.0, "ledger: delta must be in (0, 1)");
}

void PrivacyLedger::RecordUpdate() {
  if (!is_private()) {
    Fail(ErrorCode::kNonPrivate,
         "ledger: sigma = 0 is a non-private run; nothing to account");
  }
  ++updates_;
}

EpsilonResult PrivacyLedger::Epsilon() const {
  if (!is_private()) {
    Fail(ErrorCode::kNonPrivate, "ledger: sigma = 0 gives no privacy");
  }
  Require(updates_ >= 1, "ledger: no updates recorded");
  return ComputeEpsilon(updates_, config_.batch, config_.sigma, delta_,
                        lambda_grid_);
}

}  // namespace dptab

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

#ifndef DPTAB_PRIVACY_H_
#define DPTAB_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dptab/rng.h"
#include "dptab/tensor.h"

namespace dptab {

inline constexpr double kDefaultDelta = 1e-5;
inline constexpr double kNormGuard = 1e-10;

// Clip bound C, batch size B and noise multiplier sigma of the generator
// boundary sanitizer. clip may be +infinity only when sigma is 0; that
// combination disables the sanitizer entirely.
struct SanitizerConfig {
  double clip = 1.0;
  std::size_t batch = 1;
  double sigma = 0.0;

  void Validate() const;
  double bound() const { return clip / static_cast<double>(batch); }
};

// Clips the whole gradient tensor to L2 norm C/B and adds N(0, (sigma C/B)^2)
// noise to every coordinate:
//   coef = min(C/B / (||g|| + 1e-10), 1);  g_out = coef g + (C/B) sigma z.
// Rejects non-finite input.
Tensor Sanitize(const Tensor& gradient, const SanitizerConfig& config,
                Rng& rng);

std::vector<int> DefaultLambdaGrid();  // 2, 3, ..., 128

// Renyi DP of a single sanitized generator update at order lambda:
// 2 B lambda / sigma^2.
double RdpPerUpdate(std::size_t batch, double sigma, double lambda);

struct EpsilonResult {
  double epsilon = 0.0;
  int order = 0;
};

// min over lambda of  T * 2 B lambda / sigma^2 + ln(1/delta) / (lambda - 1).
EpsilonResult ComputeEpsilon(std::uint64_t updates, std::size_t batch,
                             double sigma, double delta,
                             const std::vector<int>& lambda_grid);

// Smallest sigma (bisection to 1e-3 relative) whose epsilon is at most
// target_epsilon. Fails with kInvalidArgument if sigma would exceed 1e6.
double CalibrateSigma(double target_epsilon, double delta,
                      std::uint64_t updates, std::size_t batch,
                      const std::vector<int>& lambda_grid = DefaultLambdaGrid());

// Running account of sanitized generator updates.
class PrivacyLedger {
 public:
  PrivacyLedger(SanitizerConfig config, double delta = kDefaultDelta,
                std::vector<int> lambda_grid = DefaultLambdaGrid(),
                std::uint64_t updates = 0);

  // Fails with kNonPrivate when sigma is 0.
  void RecordUpdate();
  EpsilonResult Epsilon() const;

  const SanitizerConfig& config() const { return config_; }
  std::uint64_t updates() const { return updates_; }
  double delta() const { return delta_; }
  const std::vector<int>& lambda_grid() const { return lambda_grid_; }
  bool is_private() const { return config_.sigma > 0.0; }

 private:
  SanitizerConfig config_;
  double delta_;
  std::vector<int> lambda_grid_;
  std::uint64_t updates_;
};

}  // namespace dptab

#endif  // DPTAB_PRIVACY_H_

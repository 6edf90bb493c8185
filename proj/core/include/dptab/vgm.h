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

#ifndef DPTAB_VGM_H_
#define DPTAB_VGM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dptab {

inline constexpr double kModeWeightThreshold = 0.005;
inline constexpr double kMinModeStd = 1e-6;
inline constexpr double kSingularTolerance = 1e-9;
inline constexpr std::size_t kDefaultMaxModes = 10;

// Per-column mixture used for mode-specific normalization. Mode indices run
// over the singular values first, then over the Gaussian components in
// ascending order of their means.
struct VgmModel {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<double> singular_modes;

  std::size_t gaussian_count() const { return means.size(); }
  std::size_t mode_count() const {
    return singular_modes.size() + means.size();
  }
  bool IsSingular(std::size_t mode) const {
    return mode < singular_modes.size();
  }
};

// Fits a one-dimensional Gaussian mixture with at most `max_modes`
// components. Each candidate order is fitted by EM from k-means++ seeds and
// the order with the lowest BIC wins; components lighter than
// kModeWeightThreshold are then dropped and the weights renormalized.
// Throws kData when `values` has fewer than two distinct entries.
VgmModel FitVgm(std::span<const double> values, std::size_t max_modes,
                std::uint64_t seed);

struct EncodedValue {
  double alpha = 0.0;
  std::size_t mode = 0;
};

// Routes `value` to a singular mode when it matches one within
// kSingularTolerance (alpha = 0). Otherwise picks the Gaussian component with
// the largest weighted density, lowest index on ties, and normalizes
// alpha = clamp((value - mean) / (4 std), -1, 1).
EncodedValue EncodeValue(double value, const VgmModel& model);

// Inverse of EncodeValue: singular modes return their value, Gaussian mode k
// returns 4 std_k alpha + mean_k.
double DecodeValue(double alpha, std::size_t mode, const VgmModel& model);
// As above, with the mode given as a one-hot vector. Anything other than a
// single 1 among 0s is rejected.
double DecodeValue(double alpha, std::span<const double> one_hot,
                   const VgmModel& model);

}  // namespace dptab

#endif  // DPTAB_VGM_H_

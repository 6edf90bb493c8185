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

#ifndef DPTAB_RNG_H_
#define DPTAB_RNG_H_

#include <cstdint>
#include <random>
#include <span>

namespace dptab {

// Seeded pseudo-random source used for every stochastic step: weight init,
// batch sampling, latent draws and privacy noise. Normal variates come from
// the Box-Muller transform so streams are identical across standard library
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Seeds from std::random_device. Runs seeded this way are not
  // reproducible; intended for deployments that must not reuse noise.
  static Rng FromOsEntropy();

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  // Uniform on (0, 1].
  double UniformOpen();
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  // Index drawn proportionally to non-negative `weights`; at least one weight
  // must be positive.
  std::size_t Categorical(std::span<const double> weights);

  std::uint64_t NextU64() { return engine_(); }

  // Derives an independent child stream, e.g. one per sampling call.
  Rng Fork() { return Rng(NextU64() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dptab

#endif  // DPTAB_RNG_H_

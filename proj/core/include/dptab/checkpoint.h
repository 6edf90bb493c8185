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

#ifndef DPTAB_CHECKPOINT_H_
#define DPTAB_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "dptab/gan.h"

namespace dptab {

inline constexpr char kCheckpointMagic[8] = {'D', 'P', 'T', 'A',
                                             'B', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container, all integers and floats little-endian:
//   magic "DPTABCKP" | u32 version | u64 header bytes | JSON header |
//   u64 parameter count | f64 parameters | u64 FNV-1a of all prior bytes
// The header holds hyper, schema, codec, ledger, step and every layer's
// kind, config and parameter shapes; parameters follow in network order
// (generator, discriminator, auxiliary). See docs/checkpoint_format.md.
std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Fails with kIntegrity on bad magic, unknown version, truncation, checksum
// mismatch or inconsistent shapes.
Checkpoint DeserializeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace dptab

#endif  // DPTAB_CHECKPOINT_H_

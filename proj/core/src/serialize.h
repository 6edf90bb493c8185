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

#ifndef DPTAB_SRC_SERIALIZE_H_
#define DPTAB_SRC_SERIALIZE_H_

#include "dptab/gan.h"
#include "json_util.h"

namespace dptab::internal {

// Training-shape fields of Hyper (no privacy, seed or entropy fields).
Json HyperShapeToJson(const Hyper& hyper);
// Reads the training-shape fields present in `j` onto `hyper`; unknown keys
// fail with `code`.
void HyperShapeFromJson(const Json& j, Hyper& hyper, ErrorCode code);

}  // namespace dptab::internal

#endif  // DPTAB_SRC_SERIALIZE_H_

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

#ifndef DPTAB_CODEC_H_
#define DPTAB_CODEC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dptab/csv.h"
#include "dptab/rng.h"
#include "dptab/schema.h"
#include "dptab/tensor.h"
#include "dptab/vgm.h"

namespace dptab {

// Placement of one column inside an encoded row and inside the conditional
// vector. Numeric columns occupy [alpha, beta_0 .. beta_{m-1}]; categorical
// columns occupy a one-hot block only.
struct ColumnBlock {
  bool has_alpha = false;
  std::size_t offset = 0;         // first slot of the block in the row
  std::size_t one_hot_offset = 0;  // first beta / category slot in the row
  std::size_t one_hot_width = 0;   // number of modes or categories
  std::size_t cond_offset = 0;     // first slot in the conditional vector

  std::size_t width() const { return one_hot_width + (has_alpha ? 1 : 0); }
};

struct EncodedLayout {
  std::vector<ColumnBlock> blocks;  // schema order, contiguous
  std::size_t row_width = 0;
  std::size_t cond_width = 0;

  // Slots that hold alpha values, and one range per one-hot block.
  std::vector<std::size_t> AlphaSlots() const;
  std::vector<std::pair<std::size_t, std::size_t>> OneHotBlocks() const;
};

// Fitted per-column transform. Numeric columns carry a VGM; categorical
// columns carry their category list.
struct ColumnCodec {
  ColumnSpec spec;
  VgmModel vgm;
  std::vector<std::string> categories;

  std::size_t mode_count() const {
    return spec.kind == ColumnKind::kCategorical ? categories.size()
                                                 : vgm.mode_count();
  }
};

// Everything needed to encode new rows and to decode generated ones. Does
// not reference the training data.
struct CodecState {
  TableSchema schema;
  std::vector<ColumnCodec> columns;
  EncodedLayout layout;
  // frequency[column][mode]: occurrence count in the fitted table.
  std::vector<std::vector<std::uint64_t>> frequency;
  std::size_t dropped_rows = 0;
};

struct EncodedTable {
  EncodedLayout layout;
  Tensor data;
  std::vector<std::vector<std::uint64_t>> frequency;
  // row_index[column][mode]: rows whose block selects that mode.
  std::vector<std::vector<std::vector<std::size_t>>> row_index;
};

struct EncodeResult {
  EncodedTable table;
  CodecState state;
};

// sign(x) log1p(|x|) and its exact inverse.
double LongtailForward(double x);
double LongtailInverse(double y);

EncodedLayout BuildLayout(const std::vector<ColumnCodec>& columns);

// Fits the codec on `raw` (columns in schema order) and encodes it. Rows
// with an unparseable numeric cell or an undeclared category are dropped
// and counted in state.dropped_rows.
EncodeResult EncodeTable(const StringGrid& raw, const TableSchema& schema,
                         std::size_t max_modes, std::uint64_t seed);

// Encodes rows with an already fitted codec. Rows that cannot be encoded
// are skipped; `dropped` (optional) receives their count.
Tensor EncodeRows(const StringGrid& raw, const CodecState& state,
                  std::size_t* dropped = nullptr);

// Hardens every one-hot block by argmax (lowest index on ties) and decodes
// each column back to its string form.
StringGrid DecodeTable(const Tensor& encoded, const CodecState& state);

enum class ConditionWeighting {
  kLogFrequency,  // training: mode weight log(1 + count)
  kFrequency,     // generation: mode weight count
};

struct Condition {
  std::size_t column = 0;
  std::size_t mode = 0;
  std::size_t cond_slot = 0;  // index of the 1 in the conditional vector
};

// Column uniform over the schema, then mode by `weighting`.
Condition SampleCondition(const CodecState& state, Rng& rng,
                          ConditionWeighting weighting =
                              ConditionWeighting::kLogFrequency);

std::vector<double> ConditionVector(const CodecState& state,
                                    const Condition& cond);

}  // namespace dptab

#endif  // DPTAB_CODEC_H_

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

#include "dptab/codec.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "dptab/error.h"

namespace dptab {
namespace {

// A parsed cell: numeric columns hold the (long-tail transformed) value,
// categorical columns hold the category index.
struct Cell {
  double value = 0.0;
  std::size_t category = 0;
};

std::optional<std::vector<Cell>> ParseRow(
    const std::vector<std::string>& row, const std::vector<ColumnSpec>& specs,
    const std::vector<std::map<std::string, std::size_t>>* category_index) {
  std::vector<Cell> cells(specs.size());
  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (specs[c].kind == ColumnKind::kCategorical) {
      if (category_index != nullptr) {
        const auto& index = (*category_index)[c];
        auto it = index.find(row[c]);
        if (it == index.end()) return std::nullopt;
        cells[c].category = it->second;
      }
      continue;
    }
    double v = 0.0;
    if (!ParseDouble(row[c], &v)) return std::nullopt;
    if (specs[c].kind == ColumnKind::kLongtail) v = LongtailForward(v);
    cells[c].value = v;
  }
  return cells;
}

void CheckWidth(const StringGrid& raw, std::size_t width) {
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].size() != width) {
      Fail(ErrorCode::kData, "row " + std::to_string(r + 1) + " has " +
                                 std::to_string(raw[r].size()) +
                                 " fields, schema has " +
                                 std::to_string(width));
    }
  }
}

std::vector<std::map<std::string, std::size_t>> CategoryIndex(
    const std::vector<ColumnCodec>& columns) {
  std::vector<std::map<std::string, std::size_t>> index(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t k = 0; k < columns[c].categories.size(); ++k) {
      index[c][columns[c].categories[k]] = k;
    }
  }
  return index;
}

// Writes one parsed row into `out` and returns the selected mode per column.
void EncodeCells(const std::vector<Cell>& cells, const CodecState& state,
                 Tensor& out, std::size_t r, std::vector<std::size_t>* modes) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const ColumnBlock& block = state.layout.blocks[c];
    const ColumnCodec& codec = state.columns[c];
    std::size_t mode = cells[c].category;
    if (block.has_alpha) {
      const EncodedValue ev = EncodeValue(cells[c].value, codec.vgm);
      out(r, block.offset) = ev.alpha;
      mode = ev.mode;
    }
    out(r, block.one_hot_offset + mode) = 1.0;
    if (modes != nullptr) (*modes)[c] = mode;
  }
}

std::size_t ArgMax(const Tensor& t, std::size_t r, std::size_t offset,
                   std::size_t width) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < width; ++j) {
    if (t(r, offset + j) > t(r, offset + best)) best = j;
  }
  return best;
}

}  // namespace

double LongtailForward(double x) {
  return std::copysign(std::log1p(std::abs(x)), x);
}

double LongtailInverse(double y) {
  return std::copysign(std::expm1(std::abs(y)), y);
}

std::vector<std::size_t> EncodedLayout::AlphaSlots() const {
  std::vector<std::size_t> slots;
  for (const ColumnBlock& b : blocks) {
    if (b.has_alpha) slots.push_back(b.offset);
  }
  return slots;
}

std::vector<std::pair<std::size_t, std::size_t>> EncodedLayout::OneHotBlocks()
    const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const ColumnBlock& b : blocks) {
    out.emplace_back(b.one_hot_offset, b.one_hot_width);
  }
  return out;
}

EncodedLayout BuildLayout(const std::vector<ColumnCodec>& columns) {
  EncodedLayout layout;
  for (const ColumnCodec& c : columns) {
    ColumnBlock b;
    b.has_alpha = IsNumeric(c.spec.kind);
    b.offset = layout.row_width;
    b.one_hot_offset = b.offset + (b.has_alpha ? 1 : 0);
    b.one_hot_width = c.mode_count();
    b.cond_offset = layout.cond_width;
    Require(b.one_hot_width > 0,
            "column '" + c.spec.name + "' has no modes or categories");
    layout.row_width += b.width();
    layout.cond_width += b.one_hot_width;
    layout.blocks.push_back(b);
  }
  return layout;
}

EncodeResult EncodeTable(const StringGrid& raw, const TableSchema& schema,
                         std::size_t max_modes, std::uint64_t seed) {
  ValidateSchema(schema);
  const std::size_t ncols = schema.size();
  CheckWidth(raw, ncols);

  // Declared categories are fixed up front; undeclared ones are discovered.
  std::vector<ColumnCodec> columns(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    columns[c].spec = schema.columns[c];
    columns[c].categories = schema.columns[c].categories;
  }
  std::vector<std::map<std::string, std::size_t>> declared = CategoryIndex(columns);

  std::vector<std::vector<Cell>> parsed;
  std::vector<std::size_t> kept_rows;
  std::size_t dropped = 0;
  std::vector<std::set<std::string>> seen(ncols);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    auto cells = ParseRow(raw[r], schema.columns, nullptr);
    bool ok = cells.has_value();
    for (std::size_t c = 0; ok && c < ncols; ++c) {
      if (schema.columns[c].kind != ColumnKind::kCategorical) continue;
      if (!schema.columns[c].categories.empty() &&
          !declared[c].contains(raw[r][c])) {
        ok = false;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      if (schema.columns[c].kind == ColumnKind::kCategorical) {
        seen[c].insert(raw[r][c]);
      }
    }
    parsed.push_back(std::move(*cells));
    kept_rows.push_back(r);
  }
  if (parsed.empty()) {
    Fail(ErrorCode::kData, "no encodable rows (" + std::to_string(dropped) +
                               " dropped)");
  }

  Rng seeder(seed);
  for (std::size_t c = 0; c < ncols; ++c) {
    ColumnCodec& codec = columns[c];
    const std::uint64_t column_seed = seeder.NextU64();
    if (codec.spec.kind == ColumnKind::kCategorical) {
      if (codec.categories.empty()) {
        codec.categories.assign(seen[c].begin(), seen[c].end());
      }
      continue;
    }
    const auto& singular = codec.spec.singular_values;
    std::vector<double> values;
    values.reserve(parsed.size());
    for (const auto& cells : parsed) {
      const double v = cells[c].value;
      const bool is_singular =
          std::any_of(singular.begin(), singular.end(), [v](double s) {
            return std::abs(v - s) <= kSingularTolerance;
          });
      if (!is_singular) values.push_back(v);
    }
    try {
      codec.vgm = FitVgm(values, max_modes, column_seed);
    } catch (const Error& e) {
      Fail(e.code(), "column '" + codec.spec.name + "': " + e.what());
    }
    codec.vgm.singular_modes = singular;
  }

  // Categorical cells get their index now that every category list is known.
  const auto index = CategoryIndex(columns);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (schema.columns[c].kind == ColumnKind::kCategorical) {
        parsed[i][c].category = index[c].at(raw[kept_rows[i]][c]);
      }
    }
  }

  EncodeResult result;
  CodecState& state = result.state;
  state.schema = schema;
  state.columns = std::move(columns);
  state.layout = BuildLayout(state.columns);
  state.dropped_rows = dropped;
  state.frequency.resize(ncols);
  EncodedTable& table = result.table;
  table.row_index.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    state.frequency[c].assign(state.columns[c].mode_count(), 0);
    table.row_index[c].resize(state.columns[c].mode_count());
  }

  table.layout = state.layout;
  table.data = Tensor(parsed.size(), state.layout.row_width);
  std::vector<std::size_t> modes(ncols);
  for (std::size_t r = 0; r < parsed.size(); ++r) {
    EncodeCells(parsed[r], state, table.data, r, &modes);
    for (std::size_t c = 0; c < ncols; ++c) {
      ++state.frequency[c][modes[c]];
      table.row_index[c][modes[c]].push_back(r);
    }
  }
  table.frequency = state.frequency;
  return result;
}

Tensor EncodeRows(const StringGrid& raw, const CodecState& state,
                  std::size_t* dropped) {
  CheckWidth(raw, state.schema.size());
  const auto index = CategoryIndex(state.columns);
  std::vector<std::vector<Cell>> parsed;
  std::size_t skipped = 0;
  for (const auto& row : raw) {
    auto cells = ParseRow(row, state.schema.columns, &index);
    if (cells) {
      parsed.push_back(std::move(*cells));
    } else {
      ++skipped;
    }
  }
  if (dropped != nullptr) *dropped = skipped;
  Tensor out(parsed.size(), state.layout.row_width);
  for (std::size_t r = 0; r < parsed.size(); ++r) {
    EncodeCells(parsed[r], state, out, r, nullptr);
  }
  return out;
}

StringGrid DecodeTable(const Tensor& encoded, const CodecState& state) {
  if (encoded.cols() != state.layout.row_width) {
    Fail(ErrorCode::kInvalidArgument,
         "DecodeTable: row width " + std::to_string(encoded.cols()) +
             " does not match layout width " +
             std::to_string(state.layout.row_width));
  }
  StringGrid out(encoded.rows());
  for (std::size_t r = 0; r < encoded.rows(); ++r) {
    out[r].reserve(state.columns.size());
    for (std::size_t c = 0; c < state.columns.size(); ++c) {
      const ColumnBlock& block = state.layout.blocks[c];
      const ColumnCodec& codec = state.columns[c];
      const std::size_t mode =
          ArgMax(encoded, r, block.one_hot_offset, block.one_hot_width);
      if (!block.has_alpha) {
        out[r].push_back(codec.categories[mode]);
        continue;
      }
      const double alpha = std::clamp(encoded(r, block.offset), -1.0, 1.0);
      double value = DecodeValue(alpha, mode, codec.vgm);
      if (codec.spec.kind == ColumnKind::kLongtail) {
        value = LongtailInverse(value);
      }
      out[r].push_back(FormatDouble(value));
    }
  }
  return out;
}

Condition SampleCondition(const CodecState& state, Rng& rng,
                          ConditionWeighting weighting) {
  Require(!state.frequency.empty(), "SampleCondition: empty frequency table");
  Condition cond;
  cond.column = rng.UniformInt(state.frequency.size());
  const auto& counts = state.frequency[cond.column];
  std::vector<double> weights(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double n = static_cast<double>(counts[k]);
    weights[k] = weighting == ConditionWeighting::kLogFrequency ? std::log1p(n)
                                                                : n;
  }
  cond.mode = rng.Categorical(weights);
  cond.cond_slot = state.layout.blocks[cond.column].cond_offset + cond.mode;
  return cond;
}

std::vector<double> ConditionVector(const CodecState& state,
                                    const Condition& cond) {
  std::vector<double> v(state.layout.cond_width, 0.0);
  v.at(cond.cond_slot) = 1.0;
  return v;
}

}  // namespace dptab

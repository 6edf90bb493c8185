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

#ifndef DPTAB_SCHEMA_H_
#define DPTAB_SCHEMA_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dptab {

enum class ColumnKind { kContinuous, kCategorical, kMixed, kLongtail };

std::string_view ColumnKindName(ColumnKind kind);

inline bool IsNumeric(ColumnKind kind) {
  return kind != ColumnKind::kCategorical;
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  // Mixed columns only: point masses carried as their own modes.
  std::vector<double> singular_values;
  // Categorical columns only. Empty means "discover from the data".
  std::vector<std::string> categories;
  bool is_target = false;
};

struct TableSchema {
  std::vector<ColumnSpec> columns;

  std::size_t size() const { return columns.size(); }
  std::optional<std::size_t> TargetIndex() const;
  std::optional<std::size_t> IndexOf(std::string_view name) const;
};

// Throws kConfig on duplicate names, more than one target, singular values
// on a non-mixed column, a mixed column without singular values, duplicate
// singular values or declared categories on a numeric column.
void ValidateSchema(const TableSchema& schema);

// Parses a schema document:
//   {"columns": [{"name": "age", "kind": "continuous"},
//                {"name": "income", "kind": "mixed", "singular_values": [0]},
//                {"name": "sex", "kind": "categorical", "is_target": true}]}
// Unknown keys and unknown kinds are rejected.
TableSchema ParseSchema(std::string_view json_text);
std::string SchemaToJson(const TableSchema& schema);

}  // namespace dptab

#endif  // DPTAB_SCHEMA_H_

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

#include "dptab/schema.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "dptab/error.h"
#include "json_util.h"

namespace dptab {

using internal::Json;

std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kContinuous: return "continuous";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kMixed: return "mixed";
    case ColumnKind::kLongtail: return "longtail";
  }
  return "unknown";
}

namespace {

ColumnKind ParseKind(const std::string& name, const std::string& column) {
  for (ColumnKind k : {ColumnKind::kContinuous, ColumnKind::kCategorical,
                       ColumnKind::kMixed, ColumnKind::kLongtail}) {
    if (ColumnKindName(k) == name) return k;
  }
  Fail(ErrorCode::kConfig,
       "column '" + column + "': unknown kind '" + name + "'");
}

}  // namespace

std::optional<std::size_t> TableSchema::TargetIndex() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].is_target) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TableSchema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

void ValidateSchema(const TableSchema& schema) {
  if (schema.columns.empty()) Fail(ErrorCode::kConfig, "schema has no columns");
  std::set<std::string> names;
  int targets = 0;
  for (const ColumnSpec& c : schema.columns) {
    if (c.name.empty()) Fail(ErrorCode::kConfig, "column with empty name");
    if (!names.insert(c.name).second) {
      Fail(ErrorCode::kConfig, "duplicate column name '" + c.name + "'");
    }
    if (c.is_target) ++targets;
    if (c.kind == ColumnKind::kMixed) {
      if (c.singular_values.empty()) {
        Fail(ErrorCode::kConfig,
             "mixed column '" + c.name + "' needs singular_values");
      }
      std::vector<double> sorted = c.singular_values;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!std::isfinite(sorted[i])) {
          Fail(ErrorCode::kConfig,
               "column '" + c.name + "': non-finite singular value");
        }
        if (i > 0 && sorted[i] == sorted[i - 1]) {
          Fail(ErrorCode::kConfig,
               "column '" + c.name + "': duplicate singular value");
        }
      }
    } else if (!c.singular_values.empty()) {
      Fail(ErrorCode::kConfig, "column '" + c.name +
                                   "': singular_values only apply to mixed "
                                   "columns");
    }
    if (c.kind != ColumnKind::kCategorical && !c.categories.empty()) {
      Fail(ErrorCode::kConfig, "column '" + c.name +
                                   "': categories only apply to categorical "
                                   "columns");
    }
    std::set<std::string> cats(c.categories.begin(), c.categories.end());
    if (cats.size() != c.categories.size()) {
      Fail(ErrorCode::kConfig, "column '" + c.name + "': duplicate category");
    }
  }
  if (targets > 1) {
    Fail(ErrorCode::kConfig, "schema declares " + std::to_string(targets) +
                                 " target columns; at most one is allowed");
  }
}

TableSchema ParseSchema(std::string_view json_text) {
  const Json doc = internal::ParseJson(json_text, ErrorCode::kConfig, "schema");
  internal::CheckKeys(doc, {"columns"}, "schema", ErrorCode::kConfig);
  const Json& cols = doc.contains("columns") ? doc["columns"] : Json();
  if (!cols.is_array()) Fail(ErrorCode::kConfig, "schema.columns must be a list");

  TableSchema schema;
  for (const Json& c : cols) {
    internal::CheckKeys(c, {"name", "kind", "singular_values", "categories",
                            "is_target"},
                        "schema column", ErrorCode::kConfig);
    ColumnSpec spec;
    spec.name = internal::Get<std::string>(c, "name", "schema column",
                                           ErrorCode::kConfig);
    const std::string context = "column '" + spec.name + "'";
    spec.kind = ParseKind(
        internal::Get<std::string>(c, "kind", context, ErrorCode::kConfig),
        spec.name);
    spec.singular_values = internal::GetOr<std::vector<double>>(
        c, "singular_values", {}, context, ErrorCode::kConfig);
    spec.categories = internal::GetOr<std::vector<std::string>>(
        c, "categories", {}, context, ErrorCode::kConfig);
    spec.is_target =
        internal::GetOr<bool>(c, "is_target", false, context, ErrorCode::kConfig);
    schema.columns.push_back(std::move(spec));
  }
  ValidateSchema(schema);
  return schema;
}

std::string SchemaToJson(const TableSchema& schema) {
  Json cols = Json::array();
  for (const ColumnSpec& c : schema.columns) {
    Json j = {{"name", c.name}, {"kind", ColumnKindName(c.kind)}};
    if (!c.singular_values.empty()) j["singular_values"] = c.singular_values;
    if (!c.categories.empty()) j["categories"] = c.categories;
    if (c.is_target) j["is_target"] = true;
    cols.push_back(std::move(j));
  }
  return Json{{"columns", cols}}.dump();
}

}  // namespace dptab

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

#ifndef DPTAB_TESTS_TEST_UTIL_H_
#define DPTAB_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "dptab/csv.h"
#include "dptab/rng.h"
#include "dptab/schema.h"

namespace dptab::testing_util {

// X ~ 0.5 N(0,1) + 0.5 N(5,1); K in {a, b} with P(b | X > 2.5) = 0.9 and
// P(b | X <= 2.5) = 0.1. K is the target.
inline TableSchema ToySchema() {
  TableSchema s;
  ColumnSpec x;
  x.name = "X";
  x.kind = ColumnKind::kContinuous;
  ColumnSpec k;
  k.name = "K";
  k.kind = ColumnKind::kCategorical;
  k.is_target = true;
  s.columns = {x, k};
  return s;
}

inline StringGrid ToyTable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  StringGrid rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.Normal(rng.Uniform() < 0.5 ? 0.0 : 5.0, 1.0);
    const double p_b = x > 2.5 ? 0.9 : 0.1;
    rows.push_back({FormatDouble(x), rng.Uniform() < p_b ? "b" : "a"});
  }
  return rows;
}

inline CsvTable WithHeader(const TableSchema& schema, StringGrid rows) {
  CsvTable t;
  for (const ColumnSpec& c : schema.columns) t.header.push_back(c.name);
  t.rows = std::move(rows);
  return t;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dptab_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dptab::testing_util

#endif  // DPTAB_TESTS_TEST_UTIL_H_

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

#ifndef DPTAB_PIPELINE_H_
#define DPTAB_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dptab/csv.h"
#include "dptab/error.h"
#include "dptab/gan.h"
#include "dptab/schema.h"

namespace dptab {

inline constexpr char kVersion[] = "0.1.0";

struct PrivacySettings {
  std::optional<double> sigma;
  std::optional<double> target_epsilon;
  double clip = 1.0;
  double delta = kDefaultDelta;
  std::vector<int> lambda_grid = DefaultLambdaGrid();
};

// File locations used by the subcommands. Empty means "not configured".
struct IoPaths {
  std::string input;       // real training table
  std::string checkpoint;
  std::string synthetic;   // sampled table
  std::string report;
  std::string members;
  std::string nonmembers;
  std::string encoded;     // encode dump
};

struct RunConfig {
  TableSchema schema;
  Hyper hyper;  // shape fields only; privacy fields come from `privacy`
  PrivacySettings privacy;
  IoPaths io;
  std::uint64_t seed = 0;
};

// Strict JSON document:
//   {"schema": {...}, "hyper": {...}, "privacy": {"sigma" | "target_epsilon",
//    "clip", "delta", "lambda_grid"}, "io": {...}, "seed": N}
// Unknown keys, a missing seed, or both/neither of sigma and target_epsilon
// fail with kConfig.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::string& path);

// Command-line values that take precedence over the config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  bool os_entropy = false;
  std::optional<std::size_t> n;
  std::string out;
  std::string checkpoint;
};

// Hyper with sigma resolved (calibrated when target_epsilon is set), clip,
// delta, grid, seed and entropy filled in.
Hyper ResolveHyper(const RunConfig& config, const Overrides& overrides);

// Reorders CSV columns into schema order. Extra CSV columns are ignored;
// a schema column missing from the header fails with kData.
StringGrid SelectColumns(const CsvTable& table, const TableSchema& schema);

// Each Run* returns its report as JSON text (numbers at 6 significant
// digits) and writes its artifacts.
std::string RunFit(const RunConfig& config, const Overrides& overrides);
// `config` may be absent; the seed then comes from the checkpoint. Without
// --n the row count of the fitted table is used.
std::string RunSample(const std::optional<RunConfig>& config,
                      const Overrides& overrides);
std::string RunEvaluate(const RunConfig& config, const Overrides& overrides);
std::string RunAttack(const RunConfig& config, const Overrides& overrides);
std::string RunEncode(const RunConfig& config, const Overrides& overrides);

struct AccountantRequest {
  std::uint64_t updates = 0;
  std::size_t batch = 1;
  std::optional<double> sigma;
  std::optional<double> target_epsilon;
  double delta = kDefaultDelta;
  std::vector<int> lambda_grid = DefaultLambdaGrid();
};
std::string RunAccountant(const AccountantRequest& request);

// Report number formatting: the value rounded to 6 significant digits.
double Round6(double value);

int ExitCodeFor(ErrorCode code);

}  // namespace dptab

#endif  // DPTAB_PIPELINE_H_

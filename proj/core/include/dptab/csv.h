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

#ifndef DPTAB_CSV_H_
#define DPTAB_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace dptab {

using StringGrid = std::vector<std::vector<std::string>>;

// Comma-separated table with a mandatory header row. Fields containing a
// comma, quote, CR or LF are double-quoted on output, quotes doubled.
struct CsvTable {
  std::vector<std::string> header;
  StringGrid rows;
};

CsvTable ParseCsv(std::string_view text);
std::string FormatCsv(const CsvTable& table);

CsvTable ReadCsvFile(const std::string& path);
// Writes to a sibling temporary file and renames it into place.
void WriteCsvFile(const std::string& path, const CsvTable& table);

// Writes `contents` to `path` via write-temp-then-rename.
void WriteFileAtomic(const std::string& path, std::string_view contents);
std::string ReadFile(const std::string& path);

// Locale-independent float rendering. Without a digit count the output is
// the shortest string that parses back to the same double.
std::string FormatDouble(double value);
std::string FormatDouble(double value, int significant_digits);
// Parses a full-string float in the C locale; returns false on any
// trailing garbage, empty input or non-finite result.
bool ParseDouble(std::string_view text, double* out);

}  // namespace dptab

#endif  // DPTAB_CSV_H_

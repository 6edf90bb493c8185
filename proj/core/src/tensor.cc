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

#include "dptab/tensor.h"

#include <cmath>

#include "dptab/error.h"

namespace dptab {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : m_(Matrix::Constant(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols), fill)) {}

Tensor Tensor::From(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Tensor t(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    Require(row.size() == c, "Tensor::From: ragged rows");
    std::size_t j = 0;
    for (double v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::Row(std::span<const double> values) {
  Tensor t(1, values.size());
  for (std::size_t j = 0; j < values.size(); ++j) t(0, j) = values[j];
  return t;
}

bool Tensor::AllFinite() const { return m_.allFinite(); }

std::string Tensor::ShapeString() const {
  return "(" + std::to_string(rows()) + ", " + std::to_string(cols()) + ")";
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.SameShape(b) && a.mat() == b.mat();
}

void CheckFinite(const Tensor& t, const std::string& what) {
  if (!t.AllFinite()) {
    Fail(ErrorCode::kInvalidArgument, what + ": non-finite entry in tensor " +
                                          t.ShapeString());
  }
}

}  // namespace dptab

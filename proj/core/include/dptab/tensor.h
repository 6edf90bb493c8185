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

#ifndef DPTAB_TENSOR_H_
#define DPTAB_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace dptab {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense row-major 2-D array of doubles. Rows are batch entries, columns are
// features. The storage is an Eigen matrix so the layer code can use its
// expression templates for the matrix products.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  explicit Tensor(Matrix m) : m_(std::move(m)) {}

  // Builds a tensor from nested braces, e.g. Tensor::From({{1, 2}, {3, 4}}).
  static Tensor From(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Row(std::span<const double> values);

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }
  bool empty() const { return m_.size() == 0; }

  double& operator()(std::size_t r, std::size_t c) { return m_(r, c); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  std::span<double> values() { return {m_.data(), size()}; }
  std::span<const double> values() const { return {m_.data(), size()}; }
  std::span<const double> row(std::size_t r) const {
    return {m_.data() + r * cols(), cols()};
  }

  Matrix& mat() { return m_; }
  const Matrix& mat() const { return m_; }

  bool SameShape(const Tensor& other) const {
    return rows() == other.rows() && cols() == other.cols();
  }
  bool AllFinite() const;
  double Norm() const { return m_.norm(); }

  std::string ShapeString() const;

 private:
  Matrix m_;
};

bool operator==(const Tensor& a, const Tensor& b);

// Throws kInvalidArgument naming `what` if any entry is NaN or infinite.
void CheckFinite(const Tensor& t, const std::string& what);

}  // namespace dptab

#endif  // DPTAB_TENSOR_H_

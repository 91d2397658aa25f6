/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LSTMSPLIT_TENSOR_HPP_
#define LSTMSPLIT_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lstmsplit {

// Dense row-major matrix of doubles. Every activation, weight and gradient
// in the library is carried by one of these. A batch of per-timestep values
// is laid out (batch, features).
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);
  Tensor2(std::initializer_list<std::initializer_list<double>> rows);

  static Tensor2 filled(std::size_t rows, std::size_t cols, double value);
  static Tensor2 identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  bool same_shape(const Tensor2 &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  bool operator==(const Tensor2 &o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Tensor2 matmul(const Tensor2 &a, const Tensor2 &b);
/// a * b^T without materialising the transpose.
Tensor2 matmul_bt(const Tensor2 &a, const Tensor2 &b);
/// a^T * b without materialising the transpose.
Tensor2 matmul_at(const Tensor2 &a, const Tensor2 &b);
Tensor2 transpose(const Tensor2 &a);

Tensor2 add(const Tensor2 &a, const Tensor2 &b);
Tensor2 sub(const Tensor2 &a, const Tensor2 &b);
Tensor2 hadamard(const Tensor2 &a, const Tensor2 &b);
Tensor2 scale(const Tensor2 &a, double s);

/// x (n x k) plus bias (k x 1) added to every row.
Tensor2 add_row_bias(const Tensor2 &x, const Tensor2 &bias);
/// Column sums of x (n x k) as a (k x 1) column; the adjoint of add_row_bias.
Tensor2 sum_rows(const Tensor2 &x);

/// Columns [start, start + width) of x.
Tensor2 col_block(const Tensor2 &x, std::size_t start, std::size_t width);

Tensor2 sigmoid(const Tensor2 &x);
Tensor2 tanh(const Tensor2 &x);
Tensor2 softmax_rows(const Tensor2 &logits);

double sigmoid(double x);

bool all_finite(const Tensor2 &x);
double max_abs(const Tensor2 &x);
double max_abs_diff(const Tensor2 &a, const Tensor2 &b);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_TENSOR_HPP_

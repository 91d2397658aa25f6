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

#include "lstmsplit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

[[noreturn]] void shape_error(const char *op, const Tensor2 &a, const Tensor2 &b) {
  std::ostringstream os;
  os << op << ": dimension mismatch " << a.shape_str() << " vs " << b.shape_str();
  throw DimensionError(os.str());
}

void require_same_shape(const char *op, const Tensor2 &a, const Tensor2 &b) {
  if (!a.same_shape(b)) shape_error(op, a, b);
}

Tensor2 checked(const char *op, Tensor2 t) {
  if (!all_finite(t)) throw Error(std::string(op) + ": produced a non-finite value");
  return t;
}

template <typename F>
Tensor2 map(const Tensor2 &x, F f) {
  Tensor2 out(x.rows(), x.cols());
  auto in = x.values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return out;
}

template <typename F>
Tensor2 zip(const char *op, const Tensor2 &a, const Tensor2 &b, F f) {
  require_same_shape(op, a, b);
  Tensor2 out(a.rows(), a.cols());
  auto x = a.values();
  auto y = b.values();
  auto o = out.values();
  for (std::size_t i = 0; i < x.size(); ++i) o[i] = f(x[i], y[i]);
  return checked(op, std::move(out));
}

}  // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    std::ostringstream os;
    os << "Tensor2: data length " << data_.size() << " does not match shape (" << rows_ << "x"
       << cols_ << ")";
    throw DimensionError(os.str());
  }
  if (!all_finite(*this)) throw Error("Tensor2: non-finite element");
}

Tensor2::Tensor2(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) throw DimensionError("Tensor2: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Tensor2 Tensor2::filled(std::size_t rows, std::size_t cols, double value) {
  return Tensor2(rows, cols, std::vector<double>(rows * cols, value));
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::string Tensor2::shape_str() const {
  std::ostringstream os;
  os << "(" << rows_ << "x" << cols_ << ")";
  return os.str();
}

Tensor2 matmul(const Tensor2 &a, const Tensor2 &b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tensor2 out(a.rows(), b.cols());
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return checked("matmul", std::move(out));
}

Tensor2 matmul_bt(const Tensor2 &a, const Tensor2 &b) {
  if (a.cols() != b.cols()) shape_error("matmul_bt", a, b);
  Tensor2 out(a.rows(), b.rows());
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return checked("matmul_bt", std::move(out));
}

Tensor2 matmul_at(const Tensor2 &a, const Tensor2 &b) {
  if (a.rows() != b.rows()) shape_error("matmul_at", a, b);
  Tensor2 out(a.cols(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += aki * b(k, j);
    }
  }
  return checked("matmul_at", std::move(out));
}

Tensor2 transpose(const Tensor2 &a) {
  Tensor2 out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor2 add(const Tensor2 &a, const Tensor2 &b) {
  return zip("add", a, b, [](double x, double y) { return x + y; });
}

Tensor2 sub(const Tensor2 &a, const Tensor2 &b) {
  return zip("sub", a, b, [](double x, double y) { return x - y; });
}

Tensor2 hadamard(const Tensor2 &a, const Tensor2 &b) {
  return zip("hadamard", a, b, [](double x, double y) { return x * y; });
}

Tensor2 scale(const Tensor2 &a, double s) {
  return checked("scale", map(a, [s](double x) { return x * s; }));
}

Tensor2 add_row_bias(const Tensor2 &x, const Tensor2 &bias) {
  if (bias.cols() != 1 || bias.rows() != x.cols()) shape_error("add_row_bias", x, bias);
  Tensor2 out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += bias(j, 0);
  return checked("add_row_bias", std::move(out));
}

Tensor2 sum_rows(const Tensor2 &x) {
  Tensor2 out(x.cols(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, 0) += x(i, j);
  return checked("sum_rows", std::move(out));
}

Tensor2 col_block(const Tensor2 &x, std::size_t start, std::size_t width) {
  if (start + width > x.cols()) {
    throw DimensionError("col_block: columns [" + std::to_string(start) + ", " +
                         std::to_string(start + width) + ") out of range for " + x.shape_str());
  }
  Tensor2 out(x.rows(), width);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < width; ++j) out(i, j) = x(i, start + j);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor2 sigmoid(const Tensor2 &x) {
  return map(x, [](double v) { return sigmoid(v); });
}

Tensor2 tanh(const Tensor2 &x) {
  return map(x, [](double v) { return std::tanh(v); });
}

Tensor2 softmax_rows(const Tensor2 &logits) {
  if (logits.cols() == 0) throw DimensionError("softmax_rows: need at least one column");
  Tensor2 out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto r = logits.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      out(i, j) = std::exp(r[j] - mx);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  return checked("softmax_rows", std::move(out));
}

bool all_finite(const Tensor2 &x) {
  for (double v : x.values())
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs(const Tensor2 &x) {
  double m = 0.0;
  for (double v : x.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor2 &a, const Tensor2 &b) {
  require_same_shape("max_abs_diff", a, b);
  double m = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace lstmsplit

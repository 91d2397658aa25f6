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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lstmsplit/errors.hpp"
#include "lstmsplit/tensor.hpp"

namespace lstmsplit {
namespace {

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Tensor2 a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Tensor2::identity(2), a), a);
}

TEST(Matmul, TwoByTwoProduct) {
  EXPECT_EQ(matmul(Tensor2{{1, 2}, {3, 4}}, Tensor2{{5, 6}, {7, 8}}), (Tensor2{{19, 22}, {43, 50}}));
}

TEST(Matmul, ScalarCase) { EXPECT_EQ(matmul(Tensor2{{2}}, Tensor2{{3}}), Tensor2{{6}}); }

TEST(Matmul, InnerDimensionMismatchThrows) {
  EXPECT_THROW(matmul(Tensor2(2, 3), Tensor2(2, 3)), DimensionError);
}

TEST(Matmul, TransposedVariantsAgreeWithExplicitTranspose) {
  const Tensor2 a{{1, -2, 3}, {0.5, 4, -1}};
  const Tensor2 b{{2, 1, 0}, {-1, 3, 2}};
  EXPECT_EQ(matmul_bt(a, b), matmul(a, transpose(b)));
  EXPECT_EQ(matmul_at(a, b), matmul(transpose(a), b));
}

TEST(Elementwise, ShapeMismatchThrows) {
  EXPECT_THROW(add(Tensor2(2, 2), Tensor2(2, 3)), DimensionError);
  EXPECT_THROW(hadamard(Tensor2(1, 2), Tensor2(2, 1)), DimensionError);
  EXPECT_THROW(add_row_bias(Tensor2(2, 3), Tensor2(2, 1)), DimensionError);
}

TEST(Elementwise, RowBiasAndColumnSums) {
  const Tensor2 x{{1, 2}, {3, 4}};
  EXPECT_EQ(add_row_bias(x, Tensor2{{10}, {20}}), (Tensor2{{11, 22}, {13, 24}}));
  EXPECT_EQ(sum_rows(x), (Tensor2{{4}, {6}}));
  EXPECT_EQ(col_block(Tensor2{{1, 2, 3, 4}}, 1, 2), (Tensor2{{2, 3}}));
}

TEST(Activations, FixedPoints) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_DOUBLE_EQ(tanh(Tensor2{{0.0}})(0, 0), 0.0);
  EXPECT_NEAR(sigmoid(3.7) + sigmoid(-3.7), 1.0, 1e-15);
}

TEST(Activations, SigmoidIsStableForLargeMagnitudes) {
  const Tensor2 s = sigmoid(Tensor2{{-1000, 1000}});
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_EQ(s(0, 1), 1.0);
}

TEST(Softmax, UniformRow) {
  const Tensor2 s = softmax_rows(Tensor2{{0, 0, 0}});
  for (double v : s.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, DominantLogitDoesNotOverflow) {
  const Tensor2 s = softmax_rows(Tensor2{{1000, 0, 0}});
  EXPECT_TRUE(all_finite(s));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  const Tensor2 a = softmax_rows(Tensor2{{1, 2}});
  const Tensor2 b = softmax_rows(Tensor2{{101, 102}});
  EXPECT_LT(max_abs_diff(a, b), 1e-15);
}

TEST(Tensor, RejectsNonFiniteValues) {
  EXPECT_THROW(Tensor2(1, 1, {std::numeric_limits<double>::quiet_NaN()}), Error);
  EXPECT_THROW(Tensor2(1, 2, {1.0}), DimensionError);
}

TEST(Tensor, OverflowingProductIsReported) {
  EXPECT_THROW(matmul(Tensor2{{1e300}}, Tensor2{{1e300}}), Error);
}

}  // namespace
}  // namespace lstmsplit

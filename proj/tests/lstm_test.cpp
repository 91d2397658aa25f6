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
#include <random>

#include "lstmsplit/errors.hpp"
#include "lstmsplit/lstm.hpp"
#include "support/oracles.hpp"

namespace lstmsplit {
namespace {

using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_lstm;
using testing::random_sequence;

TEST(LstmCell, ZeroWeightsGiveHalfGatesAndZeroState) {
  const LstmParams p = LstmParams::zeros(2, 3);
  const CellOutput out = lstm_cell_forward(p, Tensor2(1, 2), LstmState::zeros(1, 3));
  for (double v : out.gates.i.values()) EXPECT_EQ(v, 0.5);
  for (double v : out.gates.f.values()) EXPECT_EQ(v, 0.5);
  for (double v : out.gates.o.values()) EXPECT_EQ(v, 0.5);
  for (double v : out.gates.g.values()) EXPECT_EQ(v, 0.0);
  for (double v : out.state.c.values()) EXPECT_EQ(v, 0.0);
  for (double v : out.state.h.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmCell, SaturatedForgetGateCarriesTheCell) {
  LstmParams p = LstmParams::zeros(1, 1);
  p.b_ih(static_cast<std::size_t>(Gate::kForget), 0) = 10.0;
  LstmState prev = LstmState::zeros(1, 1);
  prev.c(0, 0) = 2.0;
  const CellOutput out = lstm_cell_forward(p, Tensor2(1, 1), prev);
  EXPECT_NEAR(out.gates.f(0, 0), 1.0, 1e-4);
  EXPECT_NEAR(out.state.c(0, 0), 2.0, 1e-4);
  EXPECT_NEAR(out.state.h(0, 0), 0.48201, 1e-4);
}

TEST(LstmCell, MatchesScalarOracle) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const LstmParams p = random_lstm(3, 4, gen);
    const Sequence x = random_sequence(1, 2, 3, gen);
    LstmState prev{Tensor2(2, 4), Tensor2(2, 4)};
    testing::randomize(prev.h, gen, 0.5);
    testing::randomize(prev.c, gen, 0.5);
    const CellOutput out = lstm_cell_forward(p, x[0], prev);
    const Sequence ref = testing::scalar_lstm_forward(p, x, prev.h, prev.c);
    EXPECT_LT(max_abs_diff(out.state.h, ref[0]), 1e-12);
  }
}

TEST(LstmCell, RejectsMismatchedInput) {
  const LstmParams p = LstmParams::zeros(2, 3);
  EXPECT_THROW(lstm_cell_forward(p, Tensor2(1, 3), LstmState::zeros(1, 3)), DimensionError);
  EXPECT_THROW(lstm_cell_forward(p, Tensor2(2, 2), LstmState::zeros(1, 3)), DimensionError);
}

TEST(LstmLayer, SingleStepEqualsCell) {
  std::mt19937_64 gen(3);
  const LstmParams p = random_lstm(2, 3, gen);
  const Sequence x = random_sequence(1, 2, 2, gen);
  const LayerOutput layer = lstm_layer_forward(p, x, LstmState::zeros(2, 3));
  const CellOutput cell = lstm_cell_forward(p, x[0], LstmState::zeros(2, 3));
  EXPECT_EQ(layer.h_seq[0], cell.state.h);
}

TEST(LstmLayer, ZeroParamsGiveZeroOutputs) {
  const LayerOutput out =
      lstm_layer_forward(LstmParams::zeros(1, 2), Sequence(5, Tensor2::filled(3, 1, 1.0)), LstmState::zeros(3, 2));
  for (const auto &h : out.h_seq)
    for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmLayer, ScalarThreeStepsMatchHandUnrolledRecursion) {
  LstmParams p = LstmParams::zeros(1, 1);
  const double wi[4] = {0.3, -0.2, 0.5, 0.1}, wh[4] = {0.4, 0.2, -0.3, 0.6}, b[4] = {0.1, 0.2, -0.1, 0.05};
  for (std::size_t g = 0; g < 4; ++g) {
    p.w_ih(g, 0) = wi[g];
    p.w_hh(g, 0) = wh[g];
    p.b_ih(g, 0) = b[g];
  }
  const double xs[3] = {1.0, -0.5, 2.0};
  Sequence x;
  for (double v : xs) x.push_back(Tensor2{{v}});
  const LayerOutput out = lstm_layer_forward(p, x, LstmState::zeros(1, 1));
  double h = 0, c = 0;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int t = 0; t < 3; ++t) {
    const double i = sig(wi[0] * xs[t] + wh[0] * h + b[0]);
    const double f = sig(wi[1] * xs[t] + wh[1] * h + b[1]);
    const double g = std::tanh(wi[2] * xs[t] + wh[2] * h + b[2]);
    const double o = sig(wi[3] * xs[t] + wh[3] * h + b[3]);
    c = f * c + i * g;
    h = o * std::tanh(c);
    EXPECT_NEAR(out.h_seq[t](0, 0), h, 1e-14);
  }
}

TEST(LstmLayer, MultiStepMatchesScalarOracle) {
  std::mt19937_64 gen(11);
  const LstmParams p = random_lstm(2, 5, gen);
  const Sequence x = random_sequence(6, 3, 2, gen);
  const LayerOutput out = lstm_layer_forward(p, x, LstmState::zeros(3, 5));
  const Sequence ref = testing::scalar_lstm_forward(p, x, Tensor2(3, 5), Tensor2(3, 5));
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_LT(max_abs_diff(out.h_seq[t], ref[t]), 1e-12);
}

TEST(LstmLayer, EmptySequenceThrows) {
  EXPECT_THROW(lstm_layer_forward(LstmParams::zeros(1, 1), {}, LstmState::zeros(1, 1)), DimensionError);
}

TEST(LstmBackward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 gen(5);
  const LstmParams p = random_lstm(2, 3, gen);
  const Sequence x = random_sequence(4, 2, 2, gen);
  const LayerOutput out = lstm_layer_forward(p, x, LstmState::zeros(2, 3));
  const LayerGrads g = lstm_layer_backward(p, out.cache, Sequence(4, Tensor2(2, 3)));
  EXPECT_EQ(max_abs(g.d_params.w_ih), 0.0);
  EXPECT_EQ(max_abs(g.d_params.w_hh), 0.0);
  EXPECT_EQ(max_abs(g.d_params.b_ih), 0.0);
  EXPECT_EQ(max_abs(g.d_params.b_hh), 0.0);
  for (const auto &d : g.d_x_seq) EXPECT_EQ(max_abs(d), 0.0);
}

// Scalar objective sum_t <R_t, h_t> so every timestep receives gradient R_t.
struct LayerProbe {
  LstmParams p;
  Sequence x;
  Sequence r;

  double objective() const {
    const LayerOutput out = lstm_layer_forward(p, x, LstmState::zeros(x[0].rows(), p.hidden()));
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t)
      for (std::size_t i = 0; i < r[t].size(); ++i) s += r[t].values()[i] * out.h_seq[t].values()[i];
    return s;
  }
};

TEST(LstmBackward, ParameterAndInputGradientsMatchFiniteDifferences) {
  std::mt19937_64 gen(2024);
  LayerProbe probe{random_lstm(2, 3, gen), random_sequence(4, 2, 2, gen), random_sequence(4, 2, 3, gen)};
  const LayerOutput out = lstm_layer_forward(probe.p, probe.x, LstmState::zeros(2, 3));
  const LayerGrads g = lstm_layer_backward(probe.p, out.cache, probe.r);
  auto f = [&] { return probe.objective(); };
  EXPECT_LT(max_relative_error(g.d_params.w_ih, numeric_gradient(probe.p.w_ih, f)), 1e-4);
  EXPECT_LT(max_relative_error(g.d_params.w_hh, numeric_gradient(probe.p.w_hh, f)), 1e-4);
  EXPECT_LT(max_relative_error(g.d_params.b_ih, numeric_gradient(probe.p.b_ih, f)), 1e-4);
  EXPECT_LT(max_relative_error(g.d_params.b_hh, numeric_gradient(probe.p.b_hh, f)), 1e-4);
  for (std::size_t t = 0; t < probe.x.size(); ++t)
    EXPECT_LT(max_relative_error(g.d_x_seq[t], numeric_gradient(probe.x[t], f)), 1e-4);
}

TEST(Dense, ZeroParamsGiveZeroLogits) {
  EXPECT_EQ(max_abs(dense_forward(DenseParams::zeros(3, 2), Tensor2{{1, 2}})), 0.0);
}

TEST(Dense, IdentityWeightsPassHiddenThrough) {
  DenseParams p{Tensor2::identity(2), Tensor2(2, 1)};
  EXPECT_EQ(dense_forward(p, Tensor2{{1, 2}}), (Tensor2{{1, 2}}));
}

TEST(Dense, MatchesMatmulPlusBias) {
  std::mt19937_64 gen(9);
  DenseParams p = DenseParams::zeros(4, 3);
  testing::randomize(p.w, gen, 1.0);
  testing::randomize(p.b, gen, 1.0);
  Tensor2 h(5, 3);
  testing::randomize(h, gen, 1.0);
  const Tensor2 expected = add_row_bias(matmul(h, transpose(p.w)), p.b);
  EXPECT_LT(max_abs_diff(dense_forward(p, h), expected), 1e-15);
}

TEST(Loss, UniformLogitsOverFiveClasses) {
  const std::vector<Label> y{2};
  EXPECT_NEAR(softmax_cross_entropy(Tensor2(1, 5), y).loss, std::log(5.0), 1e-12);
  EXPECT_NEAR(std::log(5.0), 1.60944, 1e-5);
}

TEST(Loss, ConfidentCorrectPredictionHasNoLoss) {
  const std::vector<Label> y{0};
  EXPECT_NEAR(softmax_cross_entropy(Tensor2{{1000, 0, 0}}, y).loss, 0.0, 1e-12);
}

TEST(Loss, LabelOutOfRangeThrows) {
  const std::vector<Label> y{3};
  EXPECT_THROW(softmax_cross_entropy(Tensor2(1, 3), y), Error);
}

TEST(Loss, LogitGradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  Tensor2 logits(3, 4);
  testing::randomize(logits, gen, 2.0);
  const std::vector<Label> y{0, 3, 1};
  const Tensor2 analytic = softmax_cross_entropy(logits, y).d_logits;
  const Tensor2 numeric = numeric_gradient(logits, [&] { return softmax_cross_entropy(logits, y).loss; });
  EXPECT_LT(max_abs_diff(analytic, numeric), 1e-6);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  std::mt19937_64 gen(6);
  DenseParams p = DenseParams::zeros(3, 4);
  testing::randomize(p.w, gen, 1.0);
  testing::randomize(p.b, gen, 1.0);
  Tensor2 h(2, 4);
  testing::randomize(h, gen, 1.0);
  const std::vector<Label> y{1, 2};
  auto f = [&] { return softmax_cross_entropy(dense_forward(p, h), y).loss; };
  const DenseGrads g = dense_backward(p, h, softmax_cross_entropy(dense_forward(p, h), y).d_logits);
  EXPECT_LT(max_relative_error(g.d_params.w, numeric_gradient(p.w, f)), 1e-4);
  EXPECT_LT(max_relative_error(g.d_params.b, numeric_gradient(p.b, f)), 1e-4);
  EXPECT_LT(max_relative_error(g.d_h, numeric_gradient(h, f)), 1e-4);
}

TEST(Sgd, ZeroLearningRateKeepsParameters) {
  std::mt19937_64 gen(1);
  const LstmParams p = random_lstm(1, 2, gen);
  EXPECT_EQ(sgd_step(p, random_lstm(1, 2, gen), 0.0), p);
}

TEST(Sgd, SingleElementStep) {
  DenseParams p{Tensor2{{1}}, Tensor2{{1}}};
  DenseParams g{Tensor2{{2}}, Tensor2{{2}}};
  const DenseParams out = sgd_step(p, g, 0.5);
  EXPECT_EQ(out.w(0, 0), 0.0);
  EXPECT_EQ(out.b(0, 0), 0.0);
}

TEST(Sgd, TwoStepsEqualOneCombinedStep) {
  std::mt19937_64 gen(2);
  const LstmParams p = random_lstm(2, 2, gen), g = random_lstm(2, 2, gen);
  const LstmParams twice = sgd_step(sgd_step(p, g, 0.1), g, 0.1);
  const LstmParams once = sgd_step(p, g, 0.2);
  EXPECT_LT(max_abs_diff(twice.w_ih, once.w_ih), 1e-15);
  EXPECT_LT(max_abs_diff(twice.w_hh, once.w_hh), 1e-15);
}

TEST(Init, ParameterCountForFullSizeLayer) {
  std::mt19937_64 gen(0);
  EXPECT_EQ(init_lstm(1, 200, gen).parameter_count(), 162400u);
}

TEST(Init, UniformWithinInverseSqrtHidden) {
  std::mt19937_64 gen(0);
  const LstmParams p = init_lstm(3, 16, gen);
  EXPECT_LE(max_abs(p.w_hh), 0.25);
  EXPECT_GT(max_abs(p.w_hh), 0.2);
  std::mt19937_64 again(0);
  EXPECT_EQ(init_lstm(3, 16, again), p);
}

}  // namespace
}  // namespace lstmsplit

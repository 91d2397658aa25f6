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

#ifndef LSTMSPLIT_LSTM_HPP_
#define LSTMSPLIT_LSTM_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lstmsplit/tensor.hpp"

namespace lstmsplit {

using Label = std::uint32_t;
using Sequence = std::vector<Tensor2>;  // one (batch x features) tensor per timestep

/// Gate block order inside the stacked weights. Fixed everywhere.
enum class Gate : std::size_t { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

/// One LSTM layer. Rows of the stacked tensors are grouped in blocks of
/// `hidden` in the order input, forget, cell, output.
struct LstmParams {
  Tensor2 w_ih;  // (4h x d)
  Tensor2 w_hh;  // (4h x h)
  Tensor2 b_ih;  // (4h x 1)
  Tensor2 b_hh;  // (4h x 1)

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden);

  std::size_t input_dim() const { return w_ih.cols(); }
  std::size_t hidden() const { return w_hh.cols(); }
  std::size_t parameter_count() const;

  bool operator==(const LstmParams &) const = default;
};

struct LstmState {
  Tensor2 h;  // (batch x hidden)
  Tensor2 c;  // (batch x hidden)

  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

struct GateRecord {
  Tensor2 i, f, g, o;
};

struct LstmStep {
  Tensor2 x;
  GateRecord gates;
  Tensor2 c;
  Tensor2 h;
};

/// Everything BPTT needs from a forward pass: the initial state and one
/// entry per timestep.
struct LstmCache {
  LstmState init;
  std::vector<LstmStep> steps;
};

struct CellOutput {
  LstmState state;
  GateRecord gates;
};

struct LayerOutput {
  Sequence h_seq;
  LstmCache cache;
};

struct LayerGrads {
  LstmParams d_params;
  Sequence d_x_seq;
};

/// Fully connected classification head applied to the last hidden state.
struct DenseParams {
  Tensor2 w;  // (classes x h)
  Tensor2 b;  // (classes x 1)

  static DenseParams zeros(std::size_t classes, std::size_t hidden);
  bool operator==(const DenseParams &) const = default;
};

struct DenseGrads {
  DenseParams d_params;
  Tensor2 d_h;
};

struct LossResult {
  double loss = 0.0;
  Tensor2 d_logits;
};

CellOutput lstm_cell_forward(const LstmParams &p, const Tensor2 &x_t, const LstmState &prev);

LayerOutput lstm_layer_forward(const LstmParams &p, const Sequence &seq, const LstmState &init);

/// BPTT through one layer. `d_h_seq[t]` is dLoss/dh_t coming from above
/// (the layer above, or the head at the last step).
LayerGrads lstm_layer_backward(const LstmParams &p, const LstmCache &cache, const Sequence &d_h_seq);

Tensor2 dense_forward(const DenseParams &p, const Tensor2 &h);
DenseGrads dense_backward(const DenseParams &p, const Tensor2 &h, const Tensor2 &d_logits);

/// Mean softmax cross-entropy over the batch and its gradient w.r.t. logits.
LossResult softmax_cross_entropy(const Tensor2 &logits, std::span<const Label> labels);

/// Row-wise argmax of logits.
std::vector<Label> argmax_rows(const Tensor2 &logits);

LstmParams sgd_step(const LstmParams &p, const LstmParams &grads, double eta);
DenseParams sgd_step(const DenseParams &p, const DenseParams &grads, double eta);

/// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64 &gen);

/// Uniform in [-1/sqrt(h), 1/sqrt(h)], blocks drawn in order w_ih, w_hh, b_ih, b_hh.
LstmParams init_lstm(std::size_t input_dim, std::size_t hidden, std::mt19937_64 &gen);
/// Uniform in [-1/sqrt(hidden), 1/sqrt(hidden)], w then b.
DenseParams init_dense(std::size_t classes, std::size_t hidden, std::mt19937_64 &gen);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_LSTM_HPP_

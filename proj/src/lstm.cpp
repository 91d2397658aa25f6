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

#include "lstmsplit/lstm.hpp"

#include <cmath>
#include <string>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

Tensor2 gate_rows(const Tensor2 &pre, Gate g, std::size_t hidden) {
  return col_block(pre, static_cast<std::size_t>(g) * hidden, hidden);
}

void fill_uniform(Tensor2 &t, double bound, std::mt19937_64 &gen) {
  for (double &v : t.values()) v = (2.0 * uniform01(gen) - 1.0) * bound;
}

void accumulate(Tensor2 &acc, const Tensor2 &delta) { acc = add(acc, delta); }

void check_state(const LstmParams &p, const Tensor2 &x_t, const LstmState &prev) {
  const std::size_t h = p.hidden();
  if (x_t.cols() != p.input_dim()) {
    throw DimensionError("lstm_cell_forward: input " + x_t.shape_str() + " vs w_ih " +
                         p.w_ih.shape_str());
  }
  if (prev.h.rows() != x_t.rows() || prev.h.cols() != h || !prev.c.same_shape(prev.h)) {
    throw DimensionError("lstm_cell_forward: state h" + prev.h.shape_str() + " c" +
                         prev.c.shape_str() + " vs input " + x_t.shape_str() + " hidden " +
                         std::to_string(h));
  }
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden) {
  return {Tensor2(4 * hidden, input_dim), Tensor2(4 * hidden, hidden), Tensor2(4 * hidden, 1),
          Tensor2(4 * hidden, 1)};
}

std::size_t LstmParams::parameter_count() const {
  return w_ih.size() + w_hh.size() + b_ih.size() + b_hh.size();
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor2(batch, hidden), Tensor2(batch, hidden)};
}

DenseParams DenseParams::zeros(std::size_t classes, std::size_t hidden) {
  return {Tensor2(classes, hidden), Tensor2(classes, 1)};
}

CellOutput lstm_cell_forward(const LstmParams &p, const Tensor2 &x_t, const LstmState &prev) {
  check_state(p, x_t, prev);
  const std::size_t h = p.hidden();

  // (batch x 4h) pre-activations for all four gates at once.
  Tensor2 pre = add(add_row_bias(matmul_bt(x_t, p.w_ih), p.b_ih),
                    add_row_bias(matmul_bt(prev.h, p.w_hh), p.b_hh));

  GateRecord gates{sigmoid(gate_rows(pre, Gate::kInput, h)),
                   sigmoid(gate_rows(pre, Gate::kForget, h)),
                   tanh(gate_rows(pre, Gate::kCell, h)),
                   sigmoid(gate_rows(pre, Gate::kOutput, h))};

  Tensor2 c = add(hadamard(gates.f, prev.c), hadamard(gates.i, gates.g));
  Tensor2 h_t = hadamard(gates.o, tanh(c));
  return {{std::move(h_t), std::move(c)}, std::move(gates)};
}

LayerOutput lstm_layer_forward(const LstmParams &p, const Sequence &seq, const LstmState &init) {
  if (seq.empty()) throw DimensionError("lstm_layer_forward: empty sequence");
  LayerOutput out;
  out.cache.init = init;
  out.h_seq.reserve(seq.size());
  out.cache.steps.reserve(seq.size());
  LstmState state = init;
  for (const Tensor2 &x_t : seq) {
    CellOutput step = lstm_cell_forward(p, x_t, state);
    out.cache.steps.push_back({x_t, std::move(step.gates), step.state.c, step.state.h});
    out.h_seq.push_back(step.state.h);
    state = std::move(step.state);
  }
  return out;
}

LayerGrads lstm_layer_backward(const LstmParams &p, const LstmCache &cache, const Sequence &d_h_seq) {
  const std::size_t steps = cache.steps.size();
  if (d_h_seq.size() != steps) {
    throw DimensionError("lstm_layer_backward: " + std::to_string(d_h_seq.size()) +
                         " upstream gradients for " + std::to_string(steps) + " cached steps");
  }
  const std::size_t h = p.hidden();
  const std::size_t batch = cache.init.h.rows();

  LayerGrads out{LstmParams::zeros(p.input_dim(), h), Sequence(steps)};
  Tensor2 dh_next(batch, h);
  Tensor2 dc_next(batch, h);

  for (std::size_t k = steps; k-- > 0;) {
    const LstmStep &s = cache.steps[k];
    const Tensor2 &c_prev = k == 0 ? cache.init.c : cache.steps[k - 1].c;
    const Tensor2 &h_prev = k == 0 ? cache.init.h : cache.steps[k - 1].h;
    const GateRecord &g = s.gates;

    Tensor2 dh = add(d_h_seq[k], dh_next);
    Tensor2 tanh_c = tanh(s.c);
    Tensor2 d_pre(batch, 4 * h);
    Tensor2 dc_prev(batch, h);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < h; ++j) {
        const double i = g.i(r, j), f = g.f(r, j), gg = g.g(r, j), o = g.o(r, j);
        const double tc = tanh_c(r, j);
        const double d_o = dh(r, j) * tc;
        const double dc = dc_next(r, j) + dh(r, j) * o * (1.0 - tc * tc);
        d_pre(r, j) = dc * gg * i * (1.0 - i);
        d_pre(r, h + j) = dc * c_prev(r, j) * f * (1.0 - f);
        d_pre(r, 2 * h + j) = dc * i * (1.0 - gg * gg);
        d_pre(r, 3 * h + j) = d_o * o * (1.0 - o);
        dc_prev(r, j) = dc * f;
      }
    }

    accumulate(out.d_params.w_ih, matmul_at(d_pre, s.x));
    accumulate(out.d_params.w_hh, matmul_at(d_pre, h_prev));
    Tensor2 db = sum_rows(d_pre);
    accumulate(out.d_params.b_ih, db);
    accumulate(out.d_params.b_hh, db);

    out.d_x_seq[k] = matmul(d_pre, p.w_ih);
    dh_next = matmul(d_pre, p.w_hh);
    dc_next = std::move(dc_prev);
  }
  return out;
}

Tensor2 dense_forward(const DenseParams &p, const Tensor2 &h) {
  if (h.cols() != p.w.cols()) {
    throw DimensionError("dense_forward: hidden " + h.shape_str() + " vs w " + p.w.shape_str());
  }
  return add_row_bias(matmul_bt(h, p.w), p.b);
}

DenseGrads dense_backward(const DenseParams &p, const Tensor2 &h, const Tensor2 &d_logits) {
  if (d_logits.cols() != p.w.rows() || d_logits.rows() != h.rows()) {
    throw DimensionError("dense_backward: d_logits " + d_logits.shape_str() + " vs w " +
                         p.w.shape_str() + " and h " + h.shape_str());
  }
  return {{matmul_at(d_logits, h), sum_rows(d_logits)}, matmul(d_logits, p.w)};
}

LossResult softmax_cross_entropy(const Tensor2 &logits, std::span<const Label> labels) {
  if (labels.size() != logits.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(logits.rows()) + " rows");
  }
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  for (Label y : labels) {
    if (y >= classes) {
      throw Error("softmax_cross_entropy: label " + std::to_string(y) + " out of range [0, " +
                  std::to_string(classes) + ")");
    }
  }
  Tensor2 probs = softmax_rows(logits);
  LossResult out{0.0, Tensor2(batch, classes)};
  for (std::size_t r = 0; r < batch; ++r) {
    // log-sum-exp form keeps the loss finite when the true-class probability underflows.
    auto row = logits.row(r);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    out.loss += (mx + std::log(z)) - row[labels[r]];
    for (std::size_t j = 0; j < classes; ++j) {
      const double onehot = j == labels[r] ? 1.0 : 0.0;
      out.d_logits(r, j) = (probs(r, j) - onehot) / static_cast<double>(batch);
    }
  }
  out.loss /= static_cast<double>(batch);
  return out;
}

std::vector<Label> argmax_rows(const Tensor2 &logits) {
  std::vector<Label> out(logits.rows(), 0);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;
    out[r] = static_cast<Label>(best);
  }
  return out;
}

LstmParams sgd_step(const LstmParams &p, const LstmParams &grads, double eta) {
  return {sub(p.w_ih, scale(grads.w_ih, eta)), sub(p.w_hh, scale(grads.w_hh, eta)),
          sub(p.b_ih, scale(grads.b_ih, eta)), sub(p.b_hh, scale(grads.b_hh, eta))};
}

DenseParams sgd_step(const DenseParams &p, const DenseParams &grads, double eta) {
  return {sub(p.w, scale(grads.w, eta)), sub(p.b, scale(grads.b, eta))};
}

double uniform01(std::mt19937_64 &gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

LstmParams init_lstm(std::size_t input_dim, std::size_t hidden, std::mt19937_64 &gen) {
  LstmParams p = LstmParams::zeros(input_dim, hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(p.w_ih, bound, gen);
  fill_uniform(p.w_hh, bound, gen);
  fill_uniform(p.b_ih, bound, gen);
  fill_uniform(p.b_hh, bound, gen);
  return p;
}

DenseParams init_dense(std::size_t classes, std::size_t hidden, std::mt19937_64 &gen) {
  DenseParams p = DenseParams::zeros(classes, hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(p.w, bound, gen);
  fill_uniform(p.b, bound, gen);
  return p;
}

}  // namespace lstmsplit

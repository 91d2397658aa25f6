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

// Independent reference implementations used by the tests: a per-element
// scalar LSTM, central finite differences, and a monolithic (unsplit)
// trainer that consumes the same batch stream as split training.

#ifndef LSTMSPLIT_TESTS_ORACLES_HPP_
#define LSTMSPLIT_TESTS_ORACLES_HPP_

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lstmsplit/data.hpp"
#include "lstmsplit/lstm.hpp"
#include "lstmsplit/split.hpp"

namespace lstmsplit::testing {

inline double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// LSTM forward written one scalar at a time straight from the gate
/// equations. Returns h for every timestep as (batch x h).
inline Sequence scalar_lstm_forward(const LstmParams &p, const Sequence &x, const Tensor2 &h0,
                                    const Tensor2 &c0) {
  const std::size_t H = p.hidden(), D = p.input_dim(), B = x.front().rows();
  Tensor2 h = h0, c = c0;
  Sequence out;
  for (const Tensor2 &xt : x) {
    Tensor2 hn(B, H), cn(B, H);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < H; ++j) {
        double pre[4];
        for (std::size_t g = 0; g < 4; ++g) {
          const std::size_t row = g * H + j;
          double s = p.b_ih(row, 0) + p.b_hh(row, 0);
          for (std::size_t k = 0; k < D; ++k) s += p.w_ih(row, k) * xt(b, k);
          for (std::size_t k = 0; k < H; ++k) s += p.w_hh(row, k) * h(b, k);
          pre[g] = s;
        }
        const double i = scalar_sigmoid(pre[0]);
        const double f = scalar_sigmoid(pre[1]);
        const double g = std::tanh(pre[2]);
        const double o = scalar_sigmoid(pre[3]);
        cn(b, j) = f * c(b, j) + i * g;
        hn(b, j) = o * std::tanh(cn(b, j));
      }
    }
    h = hn;
    c = cn;
    out.push_back(h);
  }
  return out;
}

/// Central difference of f with respect to every element of `t`.
inline Tensor2 numeric_gradient(Tensor2 &t, const std::function<double()> &f, double step = 1e-5) {
  Tensor2 g(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double saved = t(i, j);
      t(i, j) = saved + step;
      const double up = f();
      t(i, j) = saved - step;
      const double down = f();
      t(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

/// max |a-b| / max(1, |a|, |b|) over all elements.
inline double max_relative_error(const Tensor2 &a, const Tensor2 &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.values()[i], y = b.values()[i];
    const double denom = std::max({1e-8, std::abs(x), std::abs(y)});
    const double abs_err = std::abs(x - y);
    worst = std::max(worst, abs_err < 1e-9 ? 0.0 : abs_err / denom);
  }
  return worst;
}

inline Sequence random_sequence(std::size_t T, std::size_t B, std::size_t D, std::mt19937_64 &gen,
                                double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Sequence s(T, Tensor2(B, D));
  for (auto &t : s)
    for (double &v : t.values()) v = u(gen);
  return s;
}

inline void randomize(Tensor2 &t, std::mt19937_64 &gen, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double &v : t.values()) v = u(gen);
}

inline LstmParams random_lstm(std::size_t D, std::size_t H, std::mt19937_64 &gen, double scale = 0.5) {
  LstmParams p = LstmParams::zeros(D, H);
  randomize(p.w_ih, gen, scale);
  randomize(p.w_hh, gen, scale);
  randomize(p.b_ih, gen, scale);
  randomize(p.b_hh, gen, scale);
  return p;
}

/// The whole N-layer stack plus head in one piece, trained without any cut.
struct MonolithicModel {
  std::vector<LstmParams> layers;
  DenseParams head;

  static MonolithicModel from(const NetworkInit &init) {
    MonolithicModel m;
    m.layers = init.client.layers;
    m.layers.insert(m.layers.end(), init.server.layers.begin(), init.server.layers.end());
    m.head = init.server.head;
    return m;
  }

  Tensor2 logits(const Sequence &x) const {
    Sequence in = x;
    for (const auto &p : layers)
      in = lstm_layer_forward(p, in, LstmState::zeros(x.front().rows(), p.hidden())).h_seq;
    return dense_forward(head, in.back());
  }

  void train_batch(const Sequence &x, std::span<const Label> labels, double eta) {
    const std::size_t B = x.front().rows();
    std::vector<LayerOutput> outs;
    Sequence in = x;
    for (const auto &p : layers) {
      outs.push_back(lstm_layer_forward(p, in, LstmState::zeros(B, p.hidden())));
      in = outs.back().h_seq;
    }
    const LossResult loss = softmax_cross_entropy(dense_forward(head, in.back()), labels);
    const DenseGrads hg = dense_backward(head, in.back(), loss.d_logits);
    Sequence d(x.size(), Tensor2(B, layers.back().hidden()));
    d.back() = hg.d_h;
    std::vector<LstmParams> grads(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
      LayerGrads g = lstm_layer_backward(layers[l], outs[l].cache, d);
      grads[l] = g.d_params;
      d = g.d_x_seq;
    }
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l] = sgd_step(layers[l], grads[l], eta);
    head = sgd_step(head, hg.d_params, eta);
  }
};

/// Trains the monolithic model over clients 1..K in order with the batch
/// stream split training uses.
inline MonolithicModel train_monolithic(const SplitConfig &raw, const LabeledDataset &data,
                                        const PartitionPlan &plan) {
  const SplitConfig cfg = raw.resolved();
  MonolithicModel m = MonolithicModel::from(init_network(cfg));
  for (std::size_t k = 0; k < cfg.clients; ++k) {
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      for (const auto &idx : epoch_batches(plan.client_shards[k], cfg.batch_size, cfg.seed,
                                           k * cfg.epochs + e)) {
        m.train_batch(make_batch(data, idx), gather_labels(data, idx), cfg.learning_rate);
      }
    }
  }
  return m;
}

}  // namespace lstmsplit::testing

#endif  // LSTMSPLIT_TESTS_ORACLES_HPP_

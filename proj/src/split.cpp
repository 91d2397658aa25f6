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

#include "lstmsplit/split.hpp"

#include <algorithm>
#include <random>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

Tensor2 server_logits(const ServerModel &model, const Sequence &activations,
                      std::vector<LstmCache> *caches) {
  const std::size_t batch = activations.front().rows();
  const Sequence *input = &activations;
  Sequence h_seq;
  for (const LstmParams &p : model.layers) {
    LayerOutput out = lstm_layer_forward(p, *input, LstmState::zeros(batch, p.hidden()));
    if (caches) caches->push_back(std::move(out.cache));
    h_seq = std::move(out.h_seq);
    input = &h_seq;
  }
  return dense_forward(model.head, input->back());
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over a ^ golden-ratio-scaled b
  std::uint64_t z = a ^ (b * 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void check_layer_shapes(const std::vector<LstmParams> &layers, const SplitConfig &cfg) {
  std::size_t in = cfg.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t h = cfg.hidden_at(l);
    const LstmParams &p = layers[l];
    if (p.w_ih.rows() != 4 * h || p.w_ih.cols() != in || p.w_hh.rows() != 4 * h ||
        p.w_hh.cols() != h || p.b_ih.rows() != 4 * h || p.b_ih.cols() != 1 ||
        p.b_hh.rows() != 4 * h || p.b_hh.cols() != 1) {
      throw HandoffError("weights for layer " + std::to_string(l + 1) +
                         " do not match the configured architecture");
    }
    in = h;
  }
}

}  // namespace

NetworkInit init_network(const SplitConfig &cfg) {
  std::mt19937_64 gen(cfg.seed);
  NetworkInit net;
  std::size_t in = cfg.input_dim;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::size_t h = cfg.hidden_at(l);
    LstmParams p = init_lstm(in, h, gen);
    if (l < cfg.cut) net.client.layers.push_back(std::move(p));
    else net.server.layers.push_back(std::move(p));
    in = h;
  }
  net.server.head = init_dense(cfg.num_classes, in, gen);
  return net;
}

wire::WireTensor pack_sequence(const Sequence &seq) {
  if (seq.empty()) throw DimensionError("pack_sequence: empty sequence");
  const std::size_t steps = seq.size(), batch = seq[0].rows(), h = seq[0].cols();
  wire::WireTensor t;
  t.dims = {static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(steps),
            static_cast<std::uint32_t>(h)};
  t.data.resize(batch * steps * h);
  for (std::size_t s = 0; s < steps; ++s) {
    if (seq[s].rows() != batch || seq[s].cols() != h) {
      throw DimensionError("pack_sequence: ragged timestep " + seq[s].shape_str());
    }
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t j = 0; j < h; ++j) t.data[(r * steps + s) * h + j] = seq[s](r, j);
  }
  return t;
}

Sequence unpack_sequence(const wire::WireTensor &t) {
  if (t.dims.size() != 3) throw DimensionError("unpack_sequence: expected (batch x T x h)");
  const std::size_t batch = t.dims[0], steps = t.dims[1], h = t.dims[2];
  if (steps == 0 || batch == 0) throw DimensionError("unpack_sequence: empty tensor");
  Sequence seq(steps, Tensor2(batch, h));
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t s = 0; s < steps; ++s)
      for (std::size_t j = 0; j < h; ++j) seq[s](r, j) = t.data[(r * steps + s) * h + j];
  return seq;
}

Tensor2 flatten_samples(const Sequence &seq) {
  wire::WireTensor t = pack_sequence(seq);
  return Tensor2(t.dims[0], static_cast<std::size_t>(t.dims[1]) * t.dims[2], std::move(t.data));
}

Sequence unflatten_samples(const Tensor2 &flat, std::size_t steps) {
  if (steps == 0 || flat.cols() % steps != 0) {
    throw DimensionError("unflatten_samples: " + flat.shape_str() + " is not divisible into " +
                         std::to_string(steps) + " timesteps");
  }
  wire::WireTensor t;
  t.dims = {static_cast<std::uint32_t>(flat.rows()), static_cast<std::uint32_t>(steps),
            static_cast<std::uint32_t>(flat.cols() / steps)};
  t.data.assign(flat.values().begin(), flat.values().end());
  return unpack_sequence(t);
}

ClientForward client_forward(const ClientModel &model, const Sequence &x) {
  if (x.empty()) throw DimensionError("client_forward: empty sequence");
  const std::size_t batch = x.front().rows();
  ClientForward out;
  Sequence input = x;
  for (const LstmParams &p : model.layers) {
    LayerOutput layer = lstm_layer_forward(p, input, LstmState::zeros(batch, p.hidden()));
    out.caches.push_back(std::move(layer.cache));
    input = std::move(layer.h_seq);
  }
  out.cut = std::move(input);
  return out;
}

void client_backward_update(ClientModel &model, const ClientForward &fwd, const Sequence &d_cut,
                            double eta) {
  std::vector<LstmParams> grads(model.layers.size());
  Sequence d = d_cut;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    LayerGrads g = lstm_layer_backward(model.layers[l], fwd.caches[l], d);
    grads[l] = std::move(g.d_params);
    d = std::move(g.d_x_seq);
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l)
    model.layers[l] = sgd_step(model.layers[l], grads[l], eta);
}

ServerBatchResult server_process_batch(ServerModel &model, const Sequence &activations,
                                       std::span<const Label> labels, double eta) {
  if (activations.empty()) throw DimensionError("server_process_batch: empty activations");
  if (model.layers.empty()) throw DimensionError("server_process_batch: server has no LSTM layer");
  const std::size_t batch = activations.front().rows();
  const std::size_t steps = activations.size();

  std::vector<LstmCache> caches;
  Tensor2 logits = server_logits(model, activations, &caches);
  LossResult loss = softmax_cross_entropy(logits, labels);

  ServerBatchResult out;
  out.loss = loss.loss;
  const std::vector<Label> pred = argmax_rows(logits);
  for (std::size_t r = 0; r < batch; ++r) out.correct += pred[r] == labels[r] ? 1 : 0;

  const Tensor2 &last_h = caches.back().steps.back().h;
  DenseGrads head_grads = dense_backward(model.head, last_h, loss.d_logits);

  // Many-to-one readout: only the last timestep receives gradient from the head.
  Sequence d(steps, Tensor2(batch, model.layers.back().hidden()));
  d.back() = std::move(head_grads.d_h);
  std::vector<LstmParams> grads(model.layers.size());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    LayerGrads g = lstm_layer_backward(model.layers[l], caches[l], d);
    grads[l] = std::move(g.d_params);
    d = std::move(g.d_x_seq);
  }

  for (std::size_t l = 0; l < model.layers.size(); ++l)
    model.layers[l] = sgd_step(model.layers[l], grads[l], eta);
  model.head = sgd_step(model.head, head_grads.d_params, eta);
  out.cut_grads = std::move(d);
  return out;
}

std::vector<std::size_t> epoch_order(std::span<const std::size_t> shard, std::uint64_t seed,
                                     std::uint64_t global_epoch) {
  std::vector<std::size_t> order(shard.begin(), shard.end());
  std::mt19937_64 gen(mix(seed, global_epoch + 1));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::span<const std::size_t> shard,
                                                    std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t global_epoch) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const std::vector<std::size_t> order = epoch_order(shard, seed, global_epoch);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<wire::WireTensor> client_tensors(const ClientModel &model) {
  std::vector<wire::WireTensor> out;
  for (const LstmParams &p : model.layers) {
    out.push_back(wire::to_wire(p.w_ih));
    out.push_back(wire::to_wire(p.w_hh));
    out.push_back(wire::to_wire(p.b_ih));
    out.push_back(wire::to_wire(p.b_hh));
  }
  return out;
}

wire::Weights make_weights(const ClientModel &model, WirePrecision precision) {
  wire::Weights w;
  w.client_id = model.client_id;
  w.tensors = client_tensors(model);
  if (precision == WirePrecision::kF32) {
    for (auto &t : w.tensors)
      for (double &v : t.data) v = wire::narrow(v);
  }
  w.checksum = wire::weights_checksum(w.tensors);
  return w;
}

ClientModel install_weights(const wire::Weights &w, const SplitConfig &cfg, std::uint32_t client_id) {
  if (wire::weights_checksum(w.tensors) != w.checksum) {
    throw HandoffError("weight checksum mismatch on handoff from client " +
                       std::to_string(w.client_id));
  }
  if (w.tensors.size() != 4 * cfg.cut) {
    throw HandoffError("handoff carries " + std::to_string(w.tensors.size()) + " tensors, expected " +
                       std::to_string(4 * cfg.cut));
  }
  ClientModel m;
  m.client_id = client_id;
  for (std::size_t l = 0; l < cfg.cut; ++l) {
    m.layers.push_back({wire::from_wire_2d(w.tensors[4 * l]), wire::from_wire_2d(w.tensors[4 * l + 1]),
                        wire::from_wire_2d(w.tensors[4 * l + 2]),
                        wire::from_wire_2d(w.tensors[4 * l + 3])});
  }
  check_layer_shapes(m.layers, cfg);
  return m;
}

void PeerDirectory::publish(std::uint32_t client_id, const wire::Weights &w) {
  frames_[client_id] = wire::encode_message({w});
}

wire::Weights PeerDirectory::fetch(std::uint32_t client_id, std::uint64_t expected_checksum) const {
  auto it = frames_.find(client_id);
  if (it == frames_.end()) {
    throw HandoffError("peer " + address_of(client_id) + " has no published weights");
  }
  auto res = wire::decode_message(it->second);
  const auto *w = res.message.as<wire::Weights>();
  if (res.status != wire::DecodeStatus::kOk || !w) throw HandoffError("peer frame is not WEIGHTS");
  if (w->checksum != expected_checksum) {
    throw HandoffError("peer weights checksum differs from the one announced to the server");
  }
  return *w;
}

std::string PeerDirectory::address_of(std::uint32_t client_id) {
  return "inproc:client-" + std::to_string(client_id);
}

// ---------------------------------------------------------------------------
// Server

SplitServer::SplitServer(SplitConfig cfg, ServerModel model)
    : cfg_(cfg.resolved()),
      cfg_hash_(cfg_.hash()),
      model_(std::move(model)),
      grad_noise_(mix(cfg_.dp.rng_seed, 0x5e7e7)) {}

void SplitServer::begin_connection() {
  state_ = State::kAwaitHello;
  finished_ = false;
  current_client_ = 0;
  last_arrival_.reset();
  last_error_.reset();
}

double SplitServer::mean_cycle_seconds() const {
  return cycles_ == 0 ? 0.0 : cycle_seconds_ / static_cast<double>(cycles_);
}

std::vector<wire::Message> SplitServer::fail(wire::ErrorCode code, const std::string &what) {
  wire::ErrorMsg e{static_cast<std::uint32_t>(code), what};
  last_error_ = e;
  finished_ = true;
  state_ = State::kDone;
  return {wire::Message{e}};
}

std::vector<wire::Message> SplitServer::on_message(const wire::Message &m) {
  try {
    switch (state_) {
      case State::kAwaitHello:
        if (const auto *h = m.as<wire::Hello>()) return on_hello(*h);
        break;
      case State::kTraining:
        if (const auto *a = m.as<wire::Activations>()) return on_activations(*a);
        if (const auto *w = m.as<wire::Weights>()) return on_weights(*w);
        break;
      case State::kDone: break;
    }
  } catch (const DimensionError &e) {
    return fail(wire::ErrorCode::kShapeMismatch, e.what());
  } catch (const HandoffError &e) {
    return fail(wire::ErrorCode::kChecksum, e.what());
  } catch (const Error &e) {
    return fail(wire::ErrorCode::kInternal, e.what());
  }
  return fail(wire::ErrorCode::kUnexpected,
              std::string("unexpected ") + wire::to_string(m.type()) + " frame");
}

std::vector<wire::Message> SplitServer::on_hello(const wire::Hello &m) {
  if (m.config_hash != cfg_hash_) {
    return fail(wire::ErrorCode::kConfigMismatch, "config hash mismatch: client " +
                                                      std::to_string(m.config_hash) + ", server " +
                                                      std::to_string(cfg_hash_));
  }
  if (m.client_id != next_client_ || m.client_id > cfg_.clients) {
    return fail(wire::ErrorCode::kOutOfOrder, "expected client " + std::to_string(next_client_) +
                                                  ", got client " + std::to_string(m.client_id));
  }
  current_client_ = m.client_id;
  state_ = State::kTraining;

  wire::ConfigMsg c;
  c.config_hash = cfg_hash_;
  c.config_text = cfg_.to_text();
  if (cfg_.handoff == HandoffMode::kCentralized && relay_) {
    c.source = wire::HandoffSource::kRelay;
    c.relayed = *relay_;
    handoffs_.push_back({relay_->client_id, current_client_, relay_->checksum});
  } else if (cfg_.handoff == HandoffMode::kPeerToPeer && last_peer_) {
    c.source = wire::HandoffSource::kPeer;
    c.peer_client = *last_peer_;
    c.peer_checksum = last_peer_checksum_;
    c.peer_address = PeerDirectory::address_of(*last_peer_);
    handoffs_.push_back({*last_peer_, current_client_, last_peer_checksum_});
  }
  last_arrival_ = Clock::now();
  return {wire::Message{std::move(c)}};
}

std::vector<wire::Message> SplitServer::on_activations(const wire::Activations &m) {
  const std::size_t h_cut = cfg_.hidden_at(cfg_.cut - 1);
  const auto &dims = m.values.dims;
  if (m.client_id != current_client_) {
    return fail(wire::ErrorCode::kUnexpected, "ACTIVATIONS from client " +
                                                  std::to_string(m.client_id) + " in session of client " +
                                                  std::to_string(current_client_));
  }
  if (dims.size() != 3 || dims[0] == 0 || dims[0] > cfg_.batch_size || dims[1] != cfg_.seq_len ||
      dims[2] != h_cut || m.labels.size() != dims[0]) {
    std::string got;
    for (auto d : dims) got += (got.empty() ? "" : "x") + std::to_string(d);
    return fail(wire::ErrorCode::kShapeMismatch,
                "activations (" + got + ") do not match negotiated (batch<=" +
                    std::to_string(cfg_.batch_size) + " x " + std::to_string(cfg_.seq_len) + " x " +
                    std::to_string(h_cut) + ")");
  }
  for (Label y : m.labels) {
    if (y >= cfg_.num_classes) {
      return fail(wire::ErrorCode::kShapeMismatch, "label " + std::to_string(y) + " out of range");
    }
  }

  const auto now = Clock::now();
  double cycle = -1.0;
  if (last_arrival_) {
    cycle = seconds_between(*last_arrival_, now);
    cycle_seconds_ += cycle;
    ++cycles_;
  }
  last_arrival_ = now;

  ServerBatchResult r =
      server_process_batch(model_, unpack_sequence(m.values), m.labels, cfg_.learning_rate);
  ++batches_;

  if (epochs_.empty() || epochs_.back().client != current_client_ || epochs_.back().epoch != m.epoch) {
    epochs_.push_back({});
    epochs_.back().client = current_client_;
    epochs_.back().epoch = m.epoch;
    loss_sum_ = 0.0;
    correct_ = 0;
    rec_cycle_seconds_ = 0.0;
    rec_cycles_ = 0;
  }
  EpochRecord &rec = epochs_.back();
  const std::size_t b = m.labels.size();
  loss_sum_ += r.loss * static_cast<double>(b);
  correct_ += r.correct;
  rec.samples += b;
  rec.batches += 1;
  rec.train_loss = loss_sum_ / static_cast<double>(rec.samples);
  rec.train_acc = accuracy(correct_, rec.samples);
  if (cycle >= 0.0) {
    rec_cycle_seconds_ += cycle;
    ++rec_cycles_;
    rec.tb_sec = rec_cycle_seconds_ / static_cast<double>(rec_cycles_);
  }

  Sequence grads = std::move(r.cut_grads);
  if (cfg_.dp.enabled && cfg_.dp.noise_gradients) {
    grads = unflatten_samples(grad_noise_.transform(flatten_samples(grads), cfg_.dp), cfg_.seq_len);
  }
  wire::Message reply{wire::Gradients{m.epoch, m.batch, pack_sequence(grads)}};
  rec.comm_bytes += wire::encoded_size(m) + wire::encoded_size(reply);
  return {std::move(reply)};
}

std::vector<wire::Message> SplitServer::on_weights(const wire::Weights &m) {
  if (m.client_id != current_client_) {
    return fail(wire::ErrorCode::kUnexpected, "WEIGHTS from client " + std::to_string(m.client_id) +
                                                  " in session of client " +
                                                  std::to_string(current_client_));
  }
  if (cfg_.handoff == HandoffMode::kPeerToPeer) {
    // Announcement only: the tensors stay with the client.
    last_peer_ = current_client_;
    last_peer_checksum_ = m.checksum;
  } else {
    install_weights(m, cfg_, m.client_id);  // throws HandoffError on a bad checksum
    relay_ = m;
  }
  state_ = State::kDone;
  finished_ = true;
  ++next_client_;
  return {wire::Message{wire::Done{}}};
}

// ---------------------------------------------------------------------------
// Client

SplitClient::SplitClient(SplitConfig cfg, std::uint32_t client_id, ClientModel initial,
                         PeerDirectory *peers)
    : cfg_(cfg.resolved()),
      id_(client_id),
      model_(std::move(initial)),
      peers_(peers),
      noise_(mix(cfg_.dp.rng_seed, client_id)) {
  model_.client_id = client_id;
}

wire::Message SplitClient::expect(Session &s, wire::MsgType type) {
  wire::Message m = s.recv();
  if (const auto *e = m.as<wire::ErrorMsg>()) {
    throw SessionError("server rejected client " + std::to_string(id_) + ": " + e->message);
  }
  if (m.type() != type) {
    throw ProtocolError(std::string("expected ") + wire::to_string(type) + ", got " +
                        wire::to_string(m.type()));
  }
  return m;
}

void SplitClient::connect(Session &s) {
  s.send({wire::Hello{id_, cfg_.hash()}});
  const wire::Message m = expect(s, wire::MsgType::kConfig);
  const auto &c = *m.as<wire::ConfigMsg>();
  if (c.config_hash != cfg_.hash()) throw ProtocolError("CONFIG hash differs from HELLO");
  std::uint32_t source_client = id_;
  if (c.source == wire::HandoffSource::kRelay) {
    model_ = install_weights(c.relayed, cfg_, id_);
    source_client = c.relayed.client_id;
  } else if (c.source == wire::HandoffSource::kPeer) {
    if (!peers_) throw HandoffError("peer-to-peer handoff offered but no peer directory is available");
    model_ = install_weights(peers_->fetch(c.peer_client, c.peer_checksum), cfg_, id_);
    source_client = c.peer_client;
  }
  // Recorded from the installed model, so a faithful handoff reproduces the
  // sender's WEIGHTS body byte for byte.
  initial_ = make_weights(model_, WirePrecision::kF64Passthrough);
  initial_->client_id = source_client;
}

ClientEpochStats SplitClient::train_epoch(Session &s, const LabeledDataset &data,
                                          std::span<const std::size_t> shard, std::uint32_t epoch) {
  if (shard.empty()) throw Error("client " + std::to_string(id_) + " has an empty shard");
  if (epoch == 0) throw Error("epochs are numbered from 1");
  const std::uint64_t global_epoch = static_cast<std::uint64_t>(id_ - 1) * cfg_.epochs + (epoch - 1);
  const auto batches = epoch_batches(shard, cfg_.batch_size, cfg_.seed, global_epoch);

  ClientEpochStats stats;
  const auto bytes0 = s.counters().bytes_sent + s.counters().bytes_received;
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const auto t0 = Clock::now();
    const auto &idx = batches[bi];
    ClientForward fwd = client_forward(model_, make_batch(data, idx));

    Tensor2 pre_noise;
    Sequence released;
    if (cfg_.dp.enabled) {
      pre_noise = flatten_samples(fwd.cut);
      released = unflatten_samples(noise_.transform(pre_noise, cfg_.dp), cfg_.seq_len);
    }
    s.send({wire::Activations{id_, epoch, static_cast<std::uint32_t>(bi),
                              pack_sequence(cfg_.dp.enabled ? released : fwd.cut),
                              gather_labels(data, idx)}});

    const wire::Message reply = expect(s, wire::MsgType::kGradients);
    const auto &g = *reply.as<wire::Gradients>();
    if (g.epoch != epoch || g.batch != bi) throw ProtocolError("GRADIENTS for a different batch");
    Sequence d_cut = unpack_sequence(g.values);
    if (d_cut.size() != fwd.cut.size() || !d_cut.front().same_shape(fwd.cut.front())) {
      throw ProtocolError("GRADIENTS shape does not match the activations sent");
    }
    if (cfg_.dp.enabled) {
      d_cut = unflatten_samples(
          clip_l2_backward(pre_noise, flatten_samples(d_cut), cfg_.dp.clip_norm), cfg_.seq_len);
    }
    client_backward_update(model_, fwd, d_cut, cfg_.learning_rate);

    stats.batches += 1;
    stats.samples += idx.size();
    stats.batch_seconds += seconds_between(t0, Clock::now());
  }
  stats.bytes = s.counters().bytes_sent + s.counters().bytes_received - bytes0;
  return stats;
}

void SplitClient::finish(Session &s) {
  wire::Weights w = make_weights(model_, s.precision());
  final_ = w;
  if (cfg_.handoff == HandoffMode::kPeerToPeer) {
    if (!peers_) throw HandoffError("peer-to-peer handoff needs a peer directory");
    peers_->publish(id_, w);
    s.send({wire::Weights{id_, {}, w.checksum}});
  } else {
    s.send({w});
  }
  expect(s, wire::MsgType::kDone);
  // Continue from exactly what was handed off.
  model_ = install_weights(w, cfg_, id_);
  s.close();
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const ClientModel &client, const ServerModel &server, const LabeledDataset &data,
                    std::span<const std::size_t> indices, const DpConfig &dp) {
  constexpr std::size_t kChunk = 256;
  EvalResult out;
  for (std::size_t i = 0; i < indices.size(); i += kChunk) {
    auto idx = indices.subspan(i, std::min(kChunk, indices.size() - i));
    ClientForward fwd = client_forward(client, make_batch(data, idx));
    Sequence cut = std::move(fwd.cut);
    if (dp.enabled) cut = unflatten_samples(clip_l2(flatten_samples(cut), dp.clip_norm), cut.size());
    const auto pred = argmax_rows(server_logits(server, cut, nullptr));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      out.correct += pred[r] == data.labels[idx[r]] ? 1 : 0;
      out.predictions.push_back(pred[r]);
    }
  }
  out.total = indices.size();
  out.accuracy = accuracy(out.correct, out.total);
  return out;
}

LinkFactory loopback_links(WirePrecision precision) {
  return [precision](SplitServer &server, std::uint32_t) -> std::unique_ptr<Session> {
    return std::make_unique<LoopbackSession>(server, precision);
  };
}

RunResult run_split_training(const SplitConfig &raw_cfg, const LabeledDataset &data,
                             const PartitionPlan &plan, const LinkFactory &links) {
  const SplitConfig cfg = raw_cfg.resolved();
  cfg.validate();
  if (plan.client_shards.size() != cfg.clients) {
    throw ConfigError("partition has " + std::to_string(plan.client_shards.size()) +
                      " shards for " + std::to_string(cfg.clients) + " clients");
  }
  if (data.seq_len != cfg.seq_len || data.num_classes() != cfg.num_classes) {
    throw ConfigError("dataset shape (T=" + std::to_string(data.seq_len) + ", classes=" +
                      std::to_string(data.num_classes()) + ") disagrees with the configuration");
  }

  const auto wall0 = Clock::now();
  NetworkInit init = init_network(cfg);
  SplitServer server(cfg, std::move(init.server));
  PeerDirectory peers;
  RunResult result;
  result.client = init.client;
  RunMetrics &metrics = result.metrics;
  LinkCounters counters;
  double batch_seconds = 0.0;
  std::size_t batches = 0;

  try {
    for (std::uint32_t k = 1; k <= cfg.clients; ++k) {
      const auto &shard = plan.client_shards[k - 1];
      if (shard.empty()) throw Error("client " + std::to_string(k) + " has an empty shard");
      std::unique_ptr<Session> session = links(server, k);
      SplitClient client(cfg, k, result.client, &peers);
      try {
        client.connect(*session);
        result.initial_weights.push_back(*client.initial_weights());
        for (std::uint32_t e = 1; e <= cfg.epochs; ++e) {
          const ClientEpochStats stats = client.train_epoch(*session, data, shard, e);
          batch_seconds += stats.batch_seconds;
          batches += stats.batches;
          auto &recs = server.epochs();
          if (!recs.empty() && recs.back().client == k && recs.back().epoch == e) {
            recs.back().tb_sec = stats.batch_seconds / static_cast<double>(stats.batches);
            recs.back().comm_bytes = stats.bytes;
            if (cfg.eval_every > 0 && e % cfg.eval_every == 0) {
              recs.back().test_acc =
                  evaluate(client.model(), server.model(), data, plan.test_indices, cfg.dp).accuracy;
            }
          }
        }
        client.finish(*session);
      } catch (...) {
        counters += session->counters();
        result.traces.push_back(session->trace());
        throw;
      }
      counters += session->counters();
      result.traces.push_back(session->trace());
      result.final_weights.push_back(*client.final_weights());
      result.client = client.model();
    }
  } catch (const Error &e) {
    metrics.failed = true;
    metrics.failure = e.what();
  }

  result.server = server.model();
  result.handoffs = server.handoffs();
  metrics.epochs = server.epochs();
  if (!metrics.failed && !plan.test_indices.empty()) {
    metrics.test_accuracy =
        evaluate(result.client, result.server, data, plan.test_indices, cfg.dp).accuracy;
  }
  metrics.mean_batch_seconds = batches == 0 ? 0.0 : batch_seconds / static_cast<double>(batches);
  metrics.batches_per_client_epoch =
      static_cast<double>(batches) / static_cast<double>(cfg.clients * cfg.epochs);
  metrics.tc_seconds = time_complexity(static_cast<double>(cfg.clients), static_cast<double>(cfg.epochs),
                                       metrics.batches_per_client_epoch, metrics.mean_batch_seconds);
  const CommComplexity cc = comm_complexity(counters);
  metrics.comm_seconds = cc.seconds;
  metrics.comm_bytes = cc.bytes;
  metrics.serialize_seconds = counters.serialize_seconds;
  metrics.frames = counters.frames_sent + counters.frames_received;
  metrics.wall_seconds = seconds_between(wall0, Clock::now());
  return result;
}

PreparedData prepare_data(const SplitConfig &raw_cfg) {
  const SplitConfig cfg = raw_cfg.resolved();
  PreparedData out;
  switch (cfg.dataset) {
    case DatasetKind::kSynth:
      out.data = synth_dataset(cfg.samples, cfg.seq_len, cfg.num_classes, cfg.seed, cfg.synth_noise);
      break;
    case DatasetKind::kEcg:
    case DatasetKind::kHar:
      if (cfg.data_path.empty()) {
        throw ConfigError("dataset " + to_string(cfg.dataset) + " needs --data PATH");
      }
      out.data = load_csv(cfg.data_path,
                          cfg.dataset == DatasetKind::kEcg ? DatasetProfile::ecg() : DatasetProfile::har());
      break;
  }
  out.plan = shuffle_split_partition(out.data.size(), cfg.test_frac, cfg.clients, cfg.seed);
  std::vector<std::size_t> train;
  for (const auto &s : out.plan.client_shards) train.insert(train.end(), s.begin(), s.end());
  out.normalizer = Normalizer::fit(out.data, train);
  out.normalizer.apply(out.data);
  return out;
}

}  // namespace lstmsplit

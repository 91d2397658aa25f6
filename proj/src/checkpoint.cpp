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

#include "lstmsplit/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "lstmsplit/errors.hpp"
#include "lstmsplit/wire.hpp"

namespace lstmsplit {

Checkpoint make_checkpoint(const SplitConfig &cfg, const ClientModel &client, const ServerModel &server,
                           const Normalizer &normalizer) {
  Checkpoint c;
  c.config_hash = cfg.hash();
  c.layers = client.layers;
  c.layers.insert(c.layers.end(), server.layers.begin(), server.layers.end());
  c.head = server.head;
  c.normalizer = normalizer;
  return c;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint &ckpt) {
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(ckpt.config_hash >> (8 * i)));
  for (const LstmParams &p : ckpt.layers) {
    wire::append_tensor(out, wire::to_wire(p.w_ih));
    wire::append_tensor(out, wire::to_wire(p.w_hh));
    wire::append_tensor(out, wire::to_wire(p.b_ih));
    wire::append_tensor(out, wire::to_wire(p.b_hh));
  }
  wire::append_tensor(out, wire::to_wire(ckpt.head.w));
  wire::append_tensor(out, wire::to_wire(ckpt.head.b));
  wire::append_tensor(out, wire::to_wire(Tensor2(1, 2, {ckpt.normalizer.mean, ckpt.normalizer.stddev})));
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw ParseError("checkpoint: file too short");
  Checkpoint c;
  for (int i = 0; i < 8; ++i) c.config_hash |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  std::vector<Tensor2> tensors;
  std::size_t pos = 8;
  try {
    while (pos < bytes.size()) tensors.push_back(wire::from_wire_2d(wire::read_tensor(bytes, pos)));
  } catch (const Error &e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (tensors.size() < 4 * 2 + 3 || (tensors.size() - 3) % 4 != 0) {
    throw ParseError("checkpoint: unexpected tensor count " + std::to_string(tensors.size()));
  }
  const std::size_t n_layers = (tensors.size() - 3) / 4;
  for (std::size_t l = 0; l < n_layers; ++l) {
    LstmParams p{tensors[4 * l], tensors[4 * l + 1], tensors[4 * l + 2], tensors[4 * l + 3]};
    const std::size_t h = p.w_hh.cols();
    if (p.w_ih.rows() != 4 * h || p.w_hh.rows() != 4 * h || p.b_ih.rows() != 4 * h ||
        p.b_hh.rows() != 4 * h || p.b_ih.cols() != 1 || p.b_hh.cols() != 1 ||
        (l > 0 && p.w_ih.cols() != c.layers.back().hidden())) {
      throw ParseError("checkpoint: inconsistent shapes in layer " + std::to_string(l + 1));
    }
    c.layers.push_back(std::move(p));
  }
  c.head.w = tensors[4 * n_layers];
  c.head.b = tensors[4 * n_layers + 1];
  const Tensor2 &norm = tensors[4 * n_layers + 2];
  if (c.head.w.cols() != c.layers.back().hidden() || c.head.b.rows() != c.head.w.rows() ||
      c.head.b.cols() != 1 || norm.rows() != 1 || norm.cols() != 2) {
    throw ParseError("checkpoint: inconsistent head or normaliser shapes");
  }
  c.normalizer.mean = norm(0, 0);
  c.normalizer.stddev = norm(0, 1);
  return c;
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

NetworkInit split_checkpoint(const Checkpoint &ckpt, std::size_t cut) {
  if (cut < 1 || cut >= ckpt.layers.size()) {
    throw ConfigError("cut " + std::to_string(cut) + " is outside the checkpoint's " +
                      std::to_string(ckpt.layers.size()) + " layers");
  }
  NetworkInit n;
  n.client.layers.assign(ckpt.layers.begin(), ckpt.layers.begin() + static_cast<std::ptrdiff_t>(cut));
  n.server.layers.assign(ckpt.layers.begin() + static_cast<std::ptrdiff_t>(cut), ckpt.layers.end());
  n.server.head = ckpt.head;
  return n;
}

}  // namespace lstmsplit

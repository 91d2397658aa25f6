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

#ifndef LSTMSPLIT_TESTS_RANDOM_MESSAGES_HPP_
#define LSTMSPLIT_TESTS_RANDOM_MESSAGES_HPP_

#include <random>
#include <string>

#include "lstmsplit/wire.hpp"

namespace lstmsplit::testing {

class MessageGenerator {
 public:
  explicit MessageGenerator(std::uint64_t seed) : gen_(seed) {}

  wire::Message next() {
    switch (gen_() % 8) {
      case 0: return {wire::Hello{u32(), gen_()}};
      case 1: {
        wire::ConfigMsg c{gen_(), text(200), wire::HandoffSource::kNone, {}, 0, 0, {}};
        const auto src = gen_() % 3;
        if (src == 1) {
          c.source = wire::HandoffSource::kRelay;
          c.relayed = weights();
        } else if (src == 2) {
          c.source = wire::HandoffSource::kPeer;
          c.peer_client = u32();
          c.peer_checksum = gen_();
          c.peer_address = text(30);
        }
        return {c};
      }
      case 2: {
        wire::Activations a{u32(), u32(), u32(), tensor3(), {}};
        a.labels.resize(a.values.dims[0]);
        for (auto &l : a.labels) l = u32();
        return {a};
      }
      case 3: return {wire::Gradients{u32(), u32(), tensor3()}};
      case 4: return {weights()};
      case 5: {
        wire::MetricsMsg m;
        for (std::size_t i = gen_() % 5; i > 0; --i) m.values.emplace_back(text(12), real(1e6));
        return {m};
      }
      case 6: return {wire::Done{}};
      default: return {wire::ErrorMsg{u32(), text(60)}};
    }
  }

 private:
  std::uint32_t u32() { return static_cast<std::uint32_t>(gen_()); }
  double real(double scale) { return std::uniform_real_distribution<double>(-scale, scale)(gen_); }

  std::string text(std::size_t max_len) {
    std::string s(gen_() % (max_len + 1), ' ');
    for (char &c : s) c = static_cast<char>(gen_() % 256);
    return s;
  }

  wire::WireTensor tensor(std::size_t max_ndim) {
    wire::WireTensor t;
    t.dims.resize(1 + gen_() % max_ndim);
    for (auto &d : t.dims) d = static_cast<std::uint32_t>(gen_() % 5);
    t.data.resize(t.element_count());
    for (double &v : t.data) v = real(100.0);
    return t;
  }

  wire::WireTensor tensor3() {
    wire::WireTensor t;
    t.dims = {static_cast<std::uint32_t>(gen_() % 5), static_cast<std::uint32_t>(gen_() % 5),
              static_cast<std::uint32_t>(gen_() % 5)};
    t.data.resize(t.element_count());
    for (double &v : t.data) v = real(100.0);
    return t;
  }

  wire::Weights weights() {
    wire::Weights w;
    w.client_id = u32();
    w.tensors.resize(gen_() % 4);
    for (auto &t : w.tensors) t = tensor(2);
    w.checksum = gen_();
    return w;
  }

  std::mt19937_64 gen_;
};

}  // namespace lstmsplit::testing

#endif  // LSTMSPLIT_TESTS_RANDOM_MESSAGES_HPP_

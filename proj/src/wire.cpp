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

#include "lstmsplit/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "lstmsplit/errors.hpp"

namespace lstmsplit::wire {

namespace {

struct ByteSink {
  std::vector<std::uint8_t> &out;
  void byte(std::uint8_t b) { out.push_back(b); }
};

struct CountSink {
  std::size_t n = 0;
  void byte(std::uint8_t) { ++n; }
};

template <typename Sink>
void put_u8(Sink &s, std::uint8_t v) {
  s.byte(v);
}

template <typename Sink>
void put_u32(Sink &s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.byte(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename Sink>
void put_u64(Sink &s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.byte(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename Sink>
void put_str(Sink &s, const std::string &v) {
  if (v.size() > kMaxPayload) throw ProtocolError("string too long for frame");
  put_u32(s, static_cast<std::uint32_t>(v.size()));
  for (char c : v) s.byte(static_cast<std::uint8_t>(c));
}

float to_f32(double v) {
  const auto f = static_cast<float>(v);
  if (!std::isfinite(f)) throw ProtocolError("tensor value does not fit in f32");
  return f;
}

template <typename Sink>
void put_tensor(Sink &s, const WireTensor &t) {
  if (t.dims.size() > 255) throw ProtocolError("tensor has more than 255 dimensions");
  if (t.data.size() != t.element_count()) {
    throw ProtocolError("tensor data length " + std::to_string(t.data.size()) +
                        " does not match dims (" + std::to_string(t.element_count()) + ")");
  }
  put_u8(s, kDtypeF32);
  put_u8(s, static_cast<std::uint8_t>(t.dims.size()));
  for (std::uint32_t d : t.dims) put_u32(s, d);
  for (double v : t.data) put_u32(s, std::bit_cast<std::uint32_t>(to_f32(v)));
}

template <typename Sink>
void put_weights(Sink &s, const Weights &w) {
  put_u32(s, w.client_id);
  put_u32(s, static_cast<std::uint32_t>(w.tensors.size()));
  for (const auto &t : w.tensors) put_tensor(s, t);
  put_u64(s, w.checksum);
}

template <typename Sink>
struct PayloadWriter {
  Sink &s;

  void operator()(const Hello &m) {
    put_u32(s, m.client_id);
    put_u64(s, m.config_hash);
  }
  void operator()(const ConfigMsg &m) {
    put_u64(s, m.config_hash);
    put_str(s, m.config_text);
    put_u8(s, static_cast<std::uint8_t>(m.source));
    switch (m.source) {
      case HandoffSource::kNone: break;
      case HandoffSource::kRelay: put_weights(s, m.relayed); break;
      case HandoffSource::kPeer:
        put_u32(s, m.peer_client);
        put_u64(s, m.peer_checksum);
        put_str(s, m.peer_address);
        break;
      default: throw ProtocolError("CONFIG: invalid handoff source");
    }
  }
  void operator()(const Activations &m) {
    if (m.values.dims.size() != 3 || m.values.dims[0] != m.labels.size()) {
      throw ProtocolError("ACTIVATIONS: tensor must be (batch x T x h) with one label per row");
    }
    put_u32(s, m.client_id);
    put_u32(s, m.epoch);
    put_u32(s, m.batch);
    put_tensor(s, m.values);
    put_u32(s, static_cast<std::uint32_t>(m.labels.size()));
    for (Label y : m.labels) put_u32(s, y);
  }
  void operator()(const Gradients &m) {
    if (m.values.dims.size() != 3) throw ProtocolError("GRADIENTS: tensor must be (batch x T x h)");
    put_u32(s, m.epoch);
    put_u32(s, m.batch);
    put_tensor(s, m.values);
  }
  void operator()(const Weights &m) { put_weights(s, m); }
  void operator()(const MetricsMsg &m) {
    put_u32(s, static_cast<std::uint32_t>(m.values.size()));
    for (const auto &[k, v] : m.values) {
      put_str(s, k);
      put_u64(s, std::bit_cast<std::uint64_t>(v));
    }
  }
  void operator()(const Done &) {}
  void operator()(const ErrorMsg &m) {
    put_u32(s, m.code);
    put_str(s, m.message);
  }
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, std::size_t pos = 0) : b_(b), pos_(pos) {}

  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char *>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  WireTensor tensor() {
    if (u8() != kDtypeF32) throw ProtocolError("tensor: unsupported dtype");
    WireTensor t;
    t.dims.resize(u8());
    std::uint64_t count = 1;
    for (auto &d : t.dims) {
      d = u32();
      count *= d;
      if (count > kMaxPayload / 4) throw ProtocolError("tensor: element count exceeds frame limit");
    }
    need(count * 4);
    t.data.resize(count);
    for (auto &v : t.data) {
      const float f = std::bit_cast<float>(u32());
      if (!std::isfinite(f)) throw ProtocolError("tensor: non-finite value");
      v = static_cast<double>(f);
    }
    return t;
  }
  Weights weights() {
    Weights w;
    w.client_id = u32();
    const std::uint32_t n = u32();
    for (std::uint32_t i = 0; i < n; ++i) w.tensors.push_back(tensor());
    w.checksum = u64();
    return w;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > b_.size() - pos_) throw ProtocolError("payload truncated");
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_;
};

Payload read_payload(MsgType type, Reader &r) {
  switch (type) {
    case MsgType::kHello: {
      Hello m;
      m.client_id = r.u32();
      m.config_hash = r.u64();
      return m;
    }
    case MsgType::kConfig: {
      ConfigMsg m;
      m.config_hash = r.u64();
      m.config_text = r.str();
      const std::uint8_t src = r.u8();
      if (src > 2) throw ProtocolError("CONFIG: invalid handoff source");
      m.source = static_cast<HandoffSource>(src);
      if (m.source == HandoffSource::kRelay) m.relayed = r.weights();
      if (m.source == HandoffSource::kPeer) {
        m.peer_client = r.u32();
        m.peer_checksum = r.u64();
        m.peer_address = r.str();
      }
      return m;
    }
    case MsgType::kActivations: {
      Activations m;
      m.client_id = r.u32();
      m.epoch = r.u32();
      m.batch = r.u32();
      m.values = r.tensor();
      const std::uint32_t n = r.u32();
      if (m.values.dims.size() != 3 || m.values.dims[0] != n) {
        throw ProtocolError("ACTIVATIONS: label count does not match batch dimension");
      }
      m.labels.resize(n);
      for (auto &y : m.labels) y = r.u32();
      return m;
    }
    case MsgType::kGradients: {
      Gradients m;
      m.epoch = r.u32();
      m.batch = r.u32();
      m.values = r.tensor();
      if (m.values.dims.size() != 3) throw ProtocolError("GRADIENTS: tensor must be 3-d");
      return m;
    }
    case MsgType::kWeights: return r.weights();
    case MsgType::kMetrics: {
      MetricsMsg m;
      const std::uint32_t n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        std::string k = r.str();
        m.values.emplace_back(std::move(k), std::bit_cast<double>(r.u64()));
      }
      return m;
    }
    case MsgType::kDone: return Done{};
    case MsgType::kError: {
      ErrorMsg m;
      m.code = r.u32();
      m.message = r.str();
      return m;
    }
  }
  throw ProtocolError("unknown message type");
}

bool known_type(std::uint8_t t) {
  return (t >= 0x01 && t <= 0x07) || t == 0x7F;
}

WireTensor narrowed(WireTensor t) {
  for (double &v : t.data) v = narrow(v);
  return t;
}

}  // namespace

const char *to_string(MsgType t) {
  switch (t) {
    case MsgType::kHello: return "HELLO";
    case MsgType::kConfig: return "CONFIG";
    case MsgType::kActivations: return "ACTIVATIONS";
    case MsgType::kGradients: return "GRADIENTS";
    case MsgType::kWeights: return "WEIGHTS";
    case MsgType::kMetrics: return "METRICS";
    case MsgType::kDone: return "DONE";
    case MsgType::kError: return "ERROR";
  }
  return "UNKNOWN";
}

std::size_t WireTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

MsgType Message::type() const {
  static constexpr MsgType kTypes[] = {MsgType::kHello,     MsgType::kConfig,  MsgType::kActivations,
                                       MsgType::kGradients, MsgType::kWeights, MsgType::kMetrics,
                                       MsgType::kDone,      MsgType::kError};
  return kTypes[body.index()];
}

std::vector<std::uint8_t> encode_message(const Message &m) {
  CountSink counter;
  std::visit(PayloadWriter<CountSink>{counter}, m.body);
  if (counter.n > kMaxPayload) throw ProtocolError("payload exceeds 2^31-1 bytes");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + counter.n);
  ByteSink sink{out};
  for (std::uint8_t b : kMagic) sink.byte(b);
  put_u8(sink, static_cast<std::uint8_t>(m.type()));
  put_u32(sink, static_cast<std::uint32_t>(counter.n));
  std::visit(PayloadWriter<ByteSink>{sink}, m.body);
  return out;
}

std::size_t encoded_size(const Message &m) {
  CountSink counter;
  std::visit(PayloadWriter<CountSink>{counter}, m.body);
  return kHeaderSize + counter.n;
}

std::size_t encoded_size(const Activations &a) {
  CountSink counter;
  PayloadWriter<CountSink>{counter}(a);
  return kHeaderSize + counter.n;
}

DecodeResult decode_message(std::span<const std::uint8_t> bytes) {
  DecodeResult res;
  const std::size_t magic_avail = std::min<std::size_t>(bytes.size(), 4);
  if (magic_avail > 0 && std::memcmp(bytes.data(), kMagic, magic_avail) != 0) {
    throw ProtocolError("bad frame magic");
  }
  if (bytes.size() < kHeaderSize) return res;
  const std::uint8_t type = bytes[4];
  if (!known_type(type)) throw ProtocolError("unknown message type 0x" + std::to_string(type));
  Reader header(bytes, 5);
  const std::uint32_t len = header.u32();
  if (len > kMaxPayload) throw ProtocolError("payload length exceeds 2^31-1");
  if (bytes.size() - kHeaderSize < len) return res;

  Reader r(bytes.subspan(kHeaderSize, len));
  res.message.body = read_payload(static_cast<MsgType>(type), r);
  if (!r.at_end()) throw ProtocolError("trailing bytes in payload");
  res.status = DecodeStatus::kOk;
  res.consumed = kHeaderSize + len;
  return res;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameReader::next() {
  DecodeResult r = decode_message(std::span<const std::uint8_t>(buf_).subspan(pos_));
  if (r.status == DecodeStatus::kIncomplete) return std::nullopt;
  pos_ += r.consumed;
  last_size_ = r.consumed;
  if (pos_ > (1u << 20) && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  return std::move(r.message);
}

double narrow(double v) { return static_cast<double>(static_cast<float>(v)); }

Message quantized(const Message &m) {
  Message out = m;
  std::visit(
      [](auto &body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Activations> || std::is_same_v<T, Gradients>) {
          body.values = narrowed(body.values);
        } else if constexpr (std::is_same_v<T, Weights>) {
          for (auto &t : body.tensors) t = narrowed(t);
        } else if constexpr (std::is_same_v<T, ConfigMsg>) {
          for (auto &t : body.relayed.tensors) t = narrowed(t);
        }
      },
      out.body);
  return out;
}

WireTensor to_wire(const Tensor2 &t) {
  WireTensor w;
  w.dims = {static_cast<std::uint32_t>(t.rows()), static_cast<std::uint32_t>(t.cols())};
  w.data.assign(t.values().begin(), t.values().end());
  return w;
}

Tensor2 from_wire_2d(const WireTensor &t) {
  if (t.dims.size() != 2) {
    throw ProtocolError("expected a 2-d tensor, got " + std::to_string(t.dims.size()) + " dims");
  }
  return Tensor2(t.dims[0], t.dims[1], t.data);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t weights_checksum(std::span<const WireTensor> tensors) {
  std::vector<std::uint8_t> bytes;
  ByteSink sink{bytes};
  for (const auto &t : tensors) {
    put_u32(sink, static_cast<std::uint32_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) put_u32(sink, d);
    for (double v : t.data) put_u64(sink, std::bit_cast<std::uint64_t>(v));
  }
  return fnv1a64(bytes);
}

void append_tensor(std::vector<std::uint8_t> &out, const WireTensor &t) {
  ByteSink sink{out};
  put_tensor(sink, t);
}

WireTensor read_tensor(std::span<const std::uint8_t> bytes, std::size_t &pos) {
  Reader r(bytes, pos);
  WireTensor t = r.tensor();
  pos = r.pos();
  return t;
}

}  // namespace lstmsplit::wire

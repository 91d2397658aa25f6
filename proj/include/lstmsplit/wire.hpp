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

// Framed binary protocol spoken between split-learning clients and the server.
//
// Frame:   'S' 'L' 'T' '1' | msg_type u8 | payload_len u32 LE | payload
// Tensor:  dtype u8 (0x01 = f32) | ndim u8 | dims u32 LE x ndim | f32 LE data, row-major
// String:  len u32 LE | bytes
//
// Payloads, all integers little-endian:
//   HELLO        client_id u32 | config_hash u64
//   CONFIG       config_hash u64 | config_text str | source u8
//                  source 1 (relay): WEIGHTS body follows
//                  source 2 (peer):  peer_client u32 | checksum u64 | address str
//   ACTIVATIONS  client_id u32 | epoch u32 | batch u32 | tensor (batch x T x h) |
//                label_count u32 | labels u32 x label_count
//   GRADIENTS    epoch u32 | batch u32 | tensor (batch x T x h)
//   WEIGHTS      client_id u32 | tensor_count u32 | tensors | checksum u64
//   METRICS      count u32 | (name str | value f64) x count
//   DONE         (empty)
//   ERROR        code u32 | message str
//
// Compute is 64-bit; tensors are narrowed to f32 on encode and widened on decode.

#ifndef LSTMSPLIT_WIRE_HPP_
#define LSTMSPLIT_WIRE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lstmsplit/lstm.hpp"
#include "lstmsplit/tensor.hpp"

namespace lstmsplit::wire {

inline constexpr std::uint8_t kMagic[4] = {'S', 'L', 'T', '1'};
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::uint64_t kMaxPayload = 0x7FFFFFFFu;
inline constexpr std::uint8_t kDtypeF32 = 0x01;

enum class MsgType : std::uint8_t {
  kHello = 0x01,
  kConfig = 0x02,
  kActivations = 0x03,
  kGradients = 0x04,
  kWeights = 0x05,
  kMetrics = 0x06,
  kDone = 0x07,
  kError = 0x7F,
};

const char *to_string(MsgType t);

/// N-d tensor as it travels. Values are held in double; encoding narrows.
struct WireTensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;

  std::size_t element_count() const;
  bool operator==(const WireTensor &) const = default;
};

struct Hello {
  std::uint32_t client_id = 0;
  std::uint64_t config_hash = 0;
  bool operator==(const Hello &) const = default;
};

struct Weights {
  std::uint32_t client_id = 0;
  std::vector<WireTensor> tensors;
  std::uint64_t checksum = 0;
  bool operator==(const Weights &) const = default;
};

enum class HandoffSource : std::uint8_t { kNone = 0, kRelay = 1, kPeer = 2 };

struct ConfigMsg {
  std::uint64_t config_hash = 0;
  std::string config_text;
  HandoffSource source = HandoffSource::kNone;
  Weights relayed;                 // source == kRelay
  std::uint32_t peer_client = 0;   // source == kPeer
  std::uint64_t peer_checksum = 0;
  std::string peer_address;
  bool operator==(const ConfigMsg &) const = default;
};

struct Activations {
  std::uint32_t client_id = 0;
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;
  WireTensor values;  // (batch x T x h_cut)
  std::vector<Label> labels;
  bool operator==(const Activations &) const = default;
};

struct Gradients {
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;
  WireTensor values;  // (batch x T x h_cut)
  bool operator==(const Gradients &) const = default;
};

struct MetricsMsg {
  std::vector<std::pair<std::string, double>> values;
  bool operator==(const MetricsMsg &) const = default;
};

struct Done {
  bool operator==(const Done &) const = default;
};

enum class ErrorCode : std::uint32_t {
  kConfigMismatch = 1,
  kOutOfOrder = 2,
  kShapeMismatch = 3,
  kChecksum = 4,
  kUnexpected = 5,
  kInternal = 6,
};

struct ErrorMsg {
  std::uint32_t code = 0;
  std::string message;
  bool operator==(const ErrorMsg &) const = default;
};

using Payload =
    std::variant<Hello, ConfigMsg, Activations, Gradients, Weights, MetricsMsg, Done, ErrorMsg>;

struct Message {
  Payload body;

  MsgType type() const;
  template <typename T>
  const T *as() const {
    return std::get_if<T>(&body);
  }
  bool operator==(const Message &) const = default;
};

/// Frame bytes for m. Throws ProtocolError when m is malformed or the payload
/// exceeds kMaxPayload.
std::vector<std::uint8_t> encode_message(const Message &m);

/// Size of encode_message(m) without building it.
std::size_t encoded_size(const Message &m);
std::size_t encoded_size(const Activations &a);

enum class DecodeStatus { kOk, kIncomplete };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kIncomplete;
  Message message;
  std::size_t consumed = 0;
};

/// Decodes the first frame in `bytes`. Returns kIncomplete when more bytes are
/// needed; throws ProtocolError on bad magic, unknown type or malformed body.
DecodeResult decode_message(std::span<const std::uint8_t> bytes);

/// Reassembles frames from arbitrarily fragmented reads.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Message> next();
  /// Size in bytes of the frame most recently returned by next().
  std::size_t last_frame_size() const { return last_size_; }
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  std::size_t last_size_ = 0;
};

/// Value the receiver sees after f32 narrowing.
double narrow(double v);
/// m with every tensor value narrowed to f32 precision.
Message quantized(const Message &m);

WireTensor to_wire(const Tensor2 &t);
Tensor2 from_wire_2d(const WireTensor &t);

/// FNV-1a over dims and the IEEE-754 bit patterns of the values.
std::uint64_t weights_checksum(std::span<const WireTensor> tensors);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

/// Encodes one tensor body (used by the checkpoint file as well).
void append_tensor(std::vector<std::uint8_t> &out, const WireTensor &t);
/// Reads one tensor body at `pos`, advancing it. Throws ProtocolError.
WireTensor read_tensor(std::span<const std::uint8_t> bytes, std::size_t &pos);

}  // namespace lstmsplit::wire

#endif  // LSTMSPLIT_WIRE_HPP_

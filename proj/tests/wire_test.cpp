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

#include <limits>
#include <random>

#include "lstmsplit/errors.hpp"
#include "lstmsplit/wire.hpp"
#include "support/random_messages.hpp"

namespace lstmsplit::wire {
namespace {

TEST(Encode, TensorBodySizeForTwoByThree) {
  WireTensor t{{2, 3}, {1, 2, 3, 4, 5, 6}};
  std::vector<std::uint8_t> out;
  append_tensor(out, t);
  EXPECT_EQ(out.size(), 34u);
  EXPECT_EQ(out[0], kDtypeF32);
  EXPECT_EQ(out[1], 2);
}

TEST(Encode, DoneIsANineByteFrame) {
  const auto bytes = encode_message({Done{}});
  ASSERT_EQ(bytes.size(), 9u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4),
            (std::vector<std::uint8_t>{'S', 'L', 'T', '1'}));
  EXPECT_EQ(bytes[4], 0x07);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7] | bytes[8], 0);
}

TEST(Encode, LittleEndianHeaderAndFields) {
  const auto bytes = encode_message({Hello{0x01020304u, 0x1122334455667788ull}});
  ASSERT_EQ(bytes.size(), 9u + 12u);
  EXPECT_EQ(bytes[5], 12);
  EXPECT_EQ(bytes[9], 0x04);
  EXPECT_EQ(bytes[12], 0x01);
  EXPECT_EQ(bytes[13], 0x88);
  EXPECT_EQ(bytes[20], 0x11);
}

TEST(Encode, EncodedSizeMatches) {
  testing::MessageGenerator gen(3);
  for (int i = 0; i < 200; ++i) {
    const Message m = gen.next();
    EXPECT_EQ(encoded_size(m), encode_message(m).size());
  }
}

TEST(Encode, ValuesOutsideF32RangeAreRejected) {
  Gradients g{0, 0, {{1, 1, 1}, {1e300}}};
  EXPECT_THROW(encode_message({g}), ProtocolError);
}

TEST(Encode, ActivationLabelCountMustMatchBatch) {
  Activations a{1, 1, 0, {{2, 1, 1}, {0.5, 0.25}}, {1}};
  EXPECT_THROW(encode_message({a}), ProtocolError);
}

TEST(RoundTrip, RandomMessagesAtWirePrecision) {
  testing::MessageGenerator gen(11);
  for (int i = 0; i < 2000; ++i) {
    const Message m = gen.next();
    const auto bytes = encode_message(m);
    const DecodeResult r = decode_message(bytes);
    ASSERT_EQ(r.status, DecodeStatus::kOk);
    EXPECT_EQ(r.consumed, bytes.size());
    EXPECT_EQ(r.message, quantized(m));
    EXPECT_EQ(encode_message(r.message), bytes);
  }
}

TEST(Decode, CorruptedMagicIsAProtocolError) {
  auto bytes = encode_message({Done{}});
  bytes[0] = 'X';
  EXPECT_THROW(decode_message(bytes), ProtocolError);
}

TEST(Decode, UnknownTypeIsAProtocolError) {
  auto bytes = encode_message({Done{}});
  bytes[4] = 0x42;
  EXPECT_THROW(decode_message(bytes), ProtocolError);
}

TEST(Decode, LengthBeyondBufferIsIncomplete) {
  auto bytes = encode_message({Hello{1, 2}});
  bytes.pop_back();
  EXPECT_EQ(decode_message(bytes).status, DecodeStatus::kIncomplete);
  EXPECT_EQ(decode_message(std::span<const std::uint8_t>(bytes.data(), 3)).status,
            DecodeStatus::kIncomplete);
}

TEST(Decode, TruncatedPayloadInsideAFrameIsAnError) {
  auto bytes = encode_message({Hello{1, 2}});
  bytes[5] = 4;  // claims 4 payload bytes, HELLO needs 12
  bytes.resize(9 + 4);
  EXPECT_THROW(decode_message(bytes), ProtocolError);
}

TEST(Decode, TrailingPayloadBytesAreAnError) {
  auto bytes = encode_message({Done{}});
  bytes[5] = 1;
  bytes.push_back(0);
  EXPECT_THROW(decode_message(bytes), ProtocolError);
}

TEST(FrameReader, FrameSplitAcrossTwoReads) {
  const auto bytes = encode_message({Hello{7, 99}});
  FrameReader reader;
  reader.feed(std::span<const std::uint8_t>(bytes.data(), 5));
  EXPECT_FALSE(reader.next());
  reader.feed(std::span<const std::uint8_t>(bytes.data() + 5, bytes.size() - 5));
  const auto m = reader.next();
  ASSERT_TRUE(m);
  EXPECT_EQ(*m, (Message{Hello{7, 99}}));
  EXPECT_EQ(reader.last_frame_size(), bytes.size());
  EXPECT_EQ(reader.buffered(), 0u);
}

TEST(FrameReader, RandomFragmentationNeverCorruptsFrames) {
  testing::MessageGenerator gen(5);
  std::mt19937_64 rng(6);
  std::vector<Message> sent;
  std::vector<std::uint8_t> stream;
  for (int i = 0; i < 300; ++i) {
    sent.push_back(gen.next());
    const auto b = encode_message(sent.back());
    stream.insert(stream.end(), b.begin(), b.end());
  }
  FrameReader reader;
  std::vector<Message> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    const std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 64);
    reader.feed(std::span<const std::uint8_t>(stream.data() + pos, n));
    pos += n;
    while (auto m = reader.next()) got.push_back(std::move(*m));
  }
  ASSERT_EQ(got.size(), sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) EXPECT_EQ(got[i], quantized(sent[i]));
}

TEST(Checksum, DependsOnValuesAndShapes) {
  const std::vector<WireTensor> a{{{2, 1}, {1.0, 2.0}}};
  const std::vector<WireTensor> b{{{1, 2}, {1.0, 2.0}}};
  const std::vector<WireTensor> c{{{2, 1}, {1.0, 2.5}}};
  EXPECT_EQ(weights_checksum(a), weights_checksum(a));
  EXPECT_NE(weights_checksum(a), weights_checksum(b));
  EXPECT_NE(weights_checksum(a), weights_checksum(c));
}

TEST(Narrow, MatchesFloatCast) {
  EXPECT_EQ(narrow(0.1), static_cast<double>(0.1f));
  EXPECT_EQ(narrow(1.0), 1.0);
}

}  // namespace
}  // namespace lstmsplit::wire

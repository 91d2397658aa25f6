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

// Checkpoint file: u64 config hash (LE), then tensor bodies in wire encoding
// (f32): w_ih, w_hh, b_ih, b_hh for every LSTM layer bottom-up, then the
// dense w and b, then a 1x2 tensor holding the input normaliser (mean, std).

#ifndef LSTMSPLIT_CHECKPOINT_HPP_
#define LSTMSPLIT_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lstmsplit/data.hpp"
#include "lstmsplit/lstm.hpp"
#include "lstmsplit/split.hpp"

namespace lstmsplit {

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::vector<LstmParams> layers;  // all N layers, bottom-up
  DenseParams head;
  Normalizer normalizer;
};

Checkpoint make_checkpoint(const SplitConfig &cfg, const ClientModel &client, const ServerModel &server,
                           const Normalizer &normalizer);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint &ckpt);
/// Throws ParseError on a truncated or malformed file.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Client/server halves of a checkpoint for a cut after layer `cut`.
NetworkInit split_checkpoint(const Checkpoint &ckpt, std::size_t cut);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_CHECKPOINT_HPP_

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

#ifndef LSTMSPLIT_CONFIG_HPP_
#define LSTMSPLIT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lstmsplit/data.hpp"
#include "lstmsplit/dp.hpp"
#include "lstmsplit/session.hpp"

namespace lstmsplit {

enum class HandoffMode { kCentralized, kPeerToPeer };

/// Full experiment configuration. Keys of the `key = value` config file are
/// the long CLI flag names (seq-len, clip-norm, ...).
struct SplitConfig {
  DatasetKind dataset = DatasetKind::kEcg;
  std::string data_path;
  std::size_t seq_len = 0;      // 0: from the dataset profile
  std::size_t input_dim = 1;
  std::size_t num_classes = 0;  // 0: from the dataset profile
  std::size_t num_layers = 2;
  std::vector<std::size_t> hidden{200};  // one entry applies to every layer
  std::size_t cut = 1;                   // layers 1..cut run on the client
  std::size_t batch_size = 32;
  std::size_t epochs = 200;  // per client
  double learning_rate = 1e-4;
  std::size_t clients = 1;
  std::uint64_t seed = 0;
  double test_frac = 0.2;
  std::size_t samples = 2000;  // synth only
  double synth_noise = 0.1;    // synth only
  HandoffMode handoff = HandoffMode::kCentralized;
  WirePrecision wire = WirePrecision::kF32;
  std::size_t eval_every = 0;  // evaluate on the test set every N epochs; 0 = only at the end
  DpConfig dp;

  /// Applies one `key = value` setting. Throws ConfigError on unknown keys or bad values.
  void set(const std::string &key, const std::string &value);
  /// Reads a config file; '#' starts a comment.
  void load_file(const std::filesystem::path &path);

  /// Fills profile-derived fields (seq_len, num_classes, per-layer hidden sizes).
  SplitConfig resolved() const;
  /// Throws ConfigError describing every violated constraint.
  void validate() const;

  std::size_t hidden_at(std::size_t layer) const;
  std::vector<std::size_t> layer_hidden() const;

  /// Canonical `key = value` text of every setting, sorted by key.
  std::string to_text() const;
  std::map<std::string, std::string> to_map() const;
  /// FNV-1a over the canonical text of the settings both sides must agree on.
  std::uint64_t hash() const;
};

std::string to_string(HandoffMode m);
std::string to_string(WirePrecision p);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_CONFIG_HPP_

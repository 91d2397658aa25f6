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

// Entry points behind the command line: in-process simulation, the socket
// server and client processes, and checkpoint evaluation. Each run writes
// metrics.csv, run.json and partition.manifest into its output directory
// (plus checkpoints/final.ckpt when the full model is known), also when the
// run aborts part-way.

#ifndef LSTMSPLIT_HARNESS_HPP_
#define LSTMSPLIT_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "lstmsplit/config.hpp"
#include "lstmsplit/metrics.hpp"
#include "lstmsplit/split.hpp"

namespace lstmsplit {

struct HarnessResult {
  std::string mode;
  RunMetrics metrics;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> checkpoint;
};

/// K clients and the server in one process over loopback sessions.
HarnessResult run_simulation(const SplitConfig &cfg, const std::filesystem::path &out_dir);

/// Listens on `bind` ("host:port", port 0 picks a free one and reports it
/// through `on_listening`) and serves clients 1..K in order.
HarnessResult run_server(const SplitConfig &cfg, const std::string &bind,
                         const std::filesystem::path &out_dir,
                         const std::function<void(std::uint16_t)> &on_listening = {});

/// Trains shard `shard` (1-based) against the server at `connect`.
HarnessResult run_client(const SplitConfig &cfg, const std::string &connect, std::uint32_t shard,
                         const std::filesystem::path &out_dir);

/// Accuracy of a checkpoint on every row of a CSV file. With `cfg` the
/// checkpoint's config hash is checked and its cut / DP clipping are applied;
/// without, the dataset profile is inferred from the class count.
EvalResult evaluate_checkpoint(const std::filesystem::path &checkpoint,
                               const std::filesystem::path &data_csv,
                               const std::optional<SplitConfig> &cfg);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_HARNESS_HPP_

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

#ifndef LSTMSPLIT_METRICS_HPP_
#define LSTMSPLIT_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lstmsplit/session.hpp"

namespace lstmsplit {

struct SplitConfig;

struct EpochRecord {
  std::uint32_t client = 0;  // 1-based
  std::uint32_t epoch = 0;   // 1-based within the client
  double train_loss = 0.0;   // sample-weighted mean over the epoch
  double train_acc = 0.0;    // percent
  std::optional<double> test_acc;
  double tb_sec = 0.0;       // mean wall time per batch in this epoch
  std::uint64_t comm_bytes = 0;
  std::size_t batches = 0;
  std::size_t samples = 0;
  /// False for client-side records: loss and accuracy are only known to the server.
  bool has_train_stats = true;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  std::optional<double> test_accuracy;  // percent
  double tc_seconds = 0.0;
  double mean_batch_seconds = 0.0;  // t_b
  double batches_per_client_epoch = 0.0;  // B
  double comm_seconds = 0.0;
  double serialize_seconds = 0.0;
  std::uint64_t comm_bytes = 0;
  std::uint64_t frames = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

/// 100 * correct / total. Throws Error when total is zero or correct > total.
double accuracy(std::size_t correct, std::size_t total);

/// TC = K * E * B * t_b.
double time_complexity(double clients, double epochs, double batches, double batch_seconds);

struct CommComplexity {
  double seconds = 0.0;
  std::uint64_t bytes = 0;
};

/// Transit time and bytes in both directions for one endpoint's counters.
CommComplexity comm_complexity(const LinkCounters &counters);

/// Header plus one row per (client, epoch) plus a trailing summary row.
void write_metrics_csv(const std::filesystem::path &path, const RunMetrics &m);

/// run.json: resolved config, seed and summary metrics.
std::string run_json(const SplitConfig &cfg, const RunMetrics &m, const std::string &mode);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_METRICS_HPP_

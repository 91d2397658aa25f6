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

#ifndef LSTMSPLIT_DATA_HPP_
#define LSTMSPLIT_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lstmsplit/lstm.hpp"

namespace lstmsplit {

enum class DatasetKind { kEcg, kHar, kSynth };

DatasetKind parse_dataset_kind(const std::string &name);
std::string to_string(DatasetKind kind);

/// Shape contract for a dataset family.
struct DatasetProfile {
  DatasetKind kind;
  std::size_t seq_len;
  std::vector<std::string> class_names;

  static DatasetProfile ecg();
  static DatasetProfile har();
  std::size_t num_classes() const { return class_names.size(); }
};

/// Sequences are stored flat: sample i occupies values[i*T*d, (i+1)*T*d),
/// timestep-major then feature.
struct LabeledDataset {
  std::vector<double> values;
  std::vector<Label> labels;
  std::vector<std::string> class_names;
  std::size_t seq_len = 0;
  std::size_t input_dim = 1;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::span<const double> sample(std::size_t i) const {
    const std::size_t stride = seq_len * input_dim;
    return std::span<const double>(values).subspan(i * stride, stride);
  }
  std::vector<std::size_t> class_counts() const;
};

/// Headerless CSV, one sample per row: label then T feature values. The label
/// may be a class index or one of the profile's class names.
LabeledDataset load_csv(const std::filesystem::path &path, const DatasetProfile &profile);

void write_csv(const std::filesystem::path &path, const LabeledDataset &ds);

struct PartitionPlan {
  std::vector<std::size_t> test_indices;
  std::vector<std::vector<std::size_t>> client_shards;
  std::uint64_t seed = 0;

  std::size_t train_size() const;
  /// Text manifest: one line per partition, "test:" or "shard<i>:" then indices.
  std::string manifest() const;
  bool operator==(const PartitionPlan &) const = default;
};

/// Fisher-Yates shuffle under `seed`; the first floor(n * test_frac) shuffled
/// indices become the test set and the rest is cut into `clients` contiguous
/// shards whose sizes differ by at most one (earlier shards get the extra).
PartitionPlan shuffle_split_partition(std::size_t n, double test_frac, std::size_t clients,
                                      std::uint64_t seed);

/// Class k is sin(2 pi (k+1) t / T) plus N(0, noise_std^2). Balanced,
/// labels cycle 0,1,..,classes-1.
LabeledDataset synth_dataset(std::size_t n, std::size_t seq_len, std::size_t classes,
                             std::uint64_t seed, double noise_std = 0.1);

struct Normalizer {
  double mean = 0.0;
  double stddev = 1.0;

  /// Global mean / std over the given samples' values.
  static Normalizer fit(const LabeledDataset &ds, std::span<const std::size_t> indices);
  void apply(LabeledDataset &ds) const;
};

/// Gathers samples into one (batch x d) tensor per timestep.
Sequence make_batch(const LabeledDataset &ds, std::span<const std::size_t> indices);
std::vector<Label> gather_labels(const LabeledDataset &ds, std::span<const std::size_t> indices);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_DATA_HPP_

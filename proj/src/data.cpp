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

#include "lstmsplit/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Label parse_label(std::string_view field, const DatasetProfile &profile, long row) {
  field = trim(field);
  for (std::size_t k = 0; k < profile.class_names.size(); ++k)
    if (field == profile.class_names[k]) return static_cast<Label>(k);
  // Accept "3" and "3.0" style numeric labels.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec == std::errc() && ptr == field.data() + field.size() && v >= 0.0 &&
      v == std::floor(v) && v < static_cast<double>(profile.num_classes())) {
    return static_cast<Label>(v);
  }
  throw ParseError("row " + std::to_string(row) + ": unknown label '" + std::string(field) + "'",
                   row);
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string &name) {
  if (name == "ecg") return DatasetKind::kEcg;
  if (name == "har") return DatasetKind::kHar;
  if (name == "synth") return DatasetKind::kSynth;
  throw ConfigError("unknown dataset '" + name + "' (expected ecg, har or synth)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kEcg: return "ecg";
    case DatasetKind::kHar: return "har";
    case DatasetKind::kSynth: return "synth";
  }
  return "?";
}

DatasetProfile DatasetProfile::ecg() { return {DatasetKind::kEcg, 128, {"N", "L", "R", "A", "V"}}; }

DatasetProfile DatasetProfile::har() {
  return {DatasetKind::kHar, 561, {"W", "WU", "WD", "S", "SD", "L"}};
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (Label y : labels) ++counts.at(y);
  return counts;
}

LabeledDataset load_csv(const std::filesystem::path &path, const DatasetProfile &profile) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file " + path.string());

  LabeledDataset ds;
  ds.class_names = profile.class_names;
  ds.seq_len = profile.seq_len;
  ds.input_dim = 1;

  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;

    std::size_t fields = 0;
    Label label = 0;
    while (true) {
      const std::size_t comma = rest.find(',');
      std::string_view field = trim(rest.substr(0, comma));
      if (fields == 0) {
        label = parse_label(field, profile, row);
      } else {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
          throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(fields + 1) +
                               ": invalid number '" + std::string(field) + "'",
                           row);
        }
        ds.values.push_back(v);
      }
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields != profile.seq_len + 1) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(profile.seq_len + 1) + " columns (label + " +
                           std::to_string(profile.seq_len) + " values), found " + std::to_string(fields),
                       row);
    }
    ds.labels.push_back(label);
  }
  return ds;
}

void write_csv(const std::filesystem::path &path, const LabeledDataset &ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double v : ds.sample(i)) out << ',' << v;
    out << '\n';
  }
}

std::size_t PartitionPlan::train_size() const {
  std::size_t n = 0;
  for (const auto &s : client_shards) n += s.size();
  return n;
}

std::string PartitionPlan::manifest() const {
  std::ostringstream os;
  os << "seed: " << seed << '\n';
  auto emit = [&os](const std::string &name, const std::vector<std::size_t> &idx) {
    os << name << ':';
    for (std::size_t i : idx) os << ' ' << i;
    os << '\n';
  };
  emit("test", test_indices);
  for (std::size_t k = 0; k < client_shards.size(); ++k)
    emit("shard" + std::to_string(k + 1), client_shards[k]);
  return os.str();
}

PartitionPlan shuffle_split_partition(std::size_t n, double test_frac, std::size_t clients,
                                      std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
  if (clients == 0) throw ConfigError("need at least one client");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }

  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_frac));
  const std::size_t n_train = n - n_test;
  if (clients > n_train) {
    throw ConfigError(std::to_string(clients) + " clients for only " + std::to_string(n_train) +
                      " training samples");
  }

  PartitionPlan plan;
  plan.seed = seed;
  plan.test_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::size_t base = n_train / clients;
  const std::size_t extra = n_train % clients;
  std::size_t pos = n_test;
  for (std::size_t k = 0; k < clients; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    plan.client_shards.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                    order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return plan;
}

LabeledDataset synth_dataset(std::size_t n, std::size_t seq_len, std::size_t classes,
                             std::uint64_t seed, double noise_std) {
  if (classes == 0 || n < classes) throw ConfigError("synth_dataset: need n >= classes >= 1");
  if (seq_len == 0) throw ConfigError("synth_dataset: sequence length must be positive");
  LabeledDataset ds;
  ds.seq_len = seq_len;
  ds.input_dim = 1;
  for (std::size_t k = 0; k < classes; ++k) ds.class_names.push_back("c" + std::to_string(k));
  ds.values.reserve(n * seq_len);
  ds.labels.reserve(n);

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double T = static_cast<double>(seq_len);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % classes;
    ds.labels.push_back(static_cast<Label>(k));
    for (std::size_t t = 0; t < seq_len; ++t) {
      double v = std::sin(2.0 * std::numbers::pi * static_cast<double>(k + 1) *
                          static_cast<double>(t) / T);
      if (noise_std > 0.0) v += noise_std * noise(gen);
      ds.values.push_back(v);
    }
  }
  return ds;
}

Normalizer Normalizer::fit(const LabeledDataset &ds, std::span<const std::size_t> indices) {
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i : indices) {
    for (double v : ds.sample(i)) {
      sum += v;
      sq += v * v;
      ++count;
    }
  }
  Normalizer z;
  if (count == 0) return z;
  z.mean = sum / static_cast<double>(count);
  const double var = sq / static_cast<double>(count) - z.mean * z.mean;
  z.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
  return z;
}

void Normalizer::apply(LabeledDataset &ds) const {
  for (double &v : ds.values) v = (v - mean) / stddev;
}

Sequence make_batch(const LabeledDataset &ds, std::span<const std::size_t> indices) {
  const std::size_t d = ds.input_dim;
  Sequence seq(ds.seq_len, Tensor2(indices.size(), d));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto s = ds.sample(indices[r]);
    for (std::size_t t = 0; t < ds.seq_len; ++t)
      for (std::size_t j = 0; j < d; ++j) seq[t](r, j) = s[t * d + j];
  }
  return seq;
}

std::vector<Label> gather_labels(const LabeledDataset &ds, std::span<const std::size_t> indices) {
  std::vector<Label> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(ds.labels[i]);
  return out;
}

}  // namespace lstmsplit

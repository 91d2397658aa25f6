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

#include "lstmsplit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lstmsplit/errors.hpp"
#include "lstmsplit/wire.hpp"

namespace lstmsplit {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string &key, const std::string &v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string &key, const std::string &v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_flag(const std::string &key, const std::string &v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string real_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Settings that do not have to match between client and server processes.
const std::set<std::string> kLocalKeys = {"data", "eval-every"};

}  // namespace

std::string to_string(HandoffMode m) { return m == HandoffMode::kCentralized ? "centralized" : "p2p"; }

std::string to_string(WirePrecision p) { return p == WirePrecision::kF32 ? "f32" : "f64"; }

void SplitConfig::set(const std::string &raw_key, const std::string &raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "dataset") {
    dataset = parse_dataset_kind(v);
  } else if (key == "data") {
    data_path = v;
  } else if (key == "seq-len") {
    seq_len = parse_count(key, v);
  } else if (key == "input-dim") {
    input_dim = parse_count(key, v);
  } else if (key == "classes") {
    num_classes = parse_count(key, v);
  } else if (key == "layers") {
    num_layers = parse_count(key, v);
  } else if (key == "hidden") {
    hidden.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) hidden.push_back(parse_count(key, trim(item)));
    if (hidden.empty()) throw ConfigError("hidden: empty list");
  } else if (key == "cut") {
    cut = parse_count(key, v);
  } else if (key == "batch") {
    batch_size = parse_count(key, v);
  } else if (key == "epochs") {
    epochs = parse_count(key, v);
  } else if (key == "lr") {
    learning_rate = parse_real(key, v);
  } else if (key == "clients") {
    clients = parse_count(key, v);
  } else if (key == "seed") {
    seed = parse_count(key, v);
  } else if (key == "test-frac") {
    test_frac = parse_real(key, v);
  } else if (key == "samples") {
    samples = parse_count(key, v);
  } else if (key == "synth-noise") {
    synth_noise = parse_real(key, v);
  } else if (key == "handoff") {
    if (v == "centralized") handoff = HandoffMode::kCentralized;
    else if (v == "p2p" || v == "peer-to-peer") handoff = HandoffMode::kPeerToPeer;
    else throw ConfigError("handoff: expected centralized or p2p, got '" + v + "'");
  } else if (key == "wire") {
    if (v == "f32") wire = WirePrecision::kF32;
    else if (v == "f64") wire = WirePrecision::kF64Passthrough;
    else throw ConfigError("wire: expected f32 or f64, got '" + v + "'");
  } else if (key == "eval-every") {
    eval_every = parse_count(key, v);
  } else if (key == "dp") {
    dp.enabled = parse_flag(key, v);
  } else if (key == "epsilon") {
    dp.epsilon = parse_real(key, v);
  } else if (key == "delta") {
    dp.delta = parse_real(key, v);
  } else if (key == "clip-norm") {
    dp.clip_norm = parse_real(key, v);
  } else if (key == "noise-gradients") {
    dp.noise_gradients = parse_flag(key, v);
  } else if (key == "dp-seed") {
    dp.rng_seed = parse_count(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void SplitConfig::load_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError &e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

SplitConfig SplitConfig::resolved() const {
  SplitConfig c = *this;
  switch (dataset) {
    case DatasetKind::kEcg:
    case DatasetKind::kHar: {
      const DatasetProfile p = dataset == DatasetKind::kEcg ? DatasetProfile::ecg() : DatasetProfile::har();
      if (c.seq_len == 0) c.seq_len = p.seq_len;
      if (c.num_classes == 0) c.num_classes = p.num_classes();
      break;
    }
    case DatasetKind::kSynth:
      if (c.seq_len == 0) c.seq_len = 32;
      if (c.num_classes == 0) c.num_classes = 4;
      break;
  }
  if (c.hidden.size() == 1 && c.num_layers > 1) c.hidden.assign(c.num_layers, c.hidden.front());
  return c;
}

void SplitConfig::validate() const {
  std::ostringstream err;
  if (num_layers < 2) err << "layers must be >= 2 (one on each side of the cut); ";
  if (cut < 1 || cut >= num_layers) err << "cut must satisfy 1 <= cut < layers; ";
  if (hidden.size() != 1 && hidden.size() != num_layers)
    err << "hidden must list one size or one per layer; ";
  for (std::size_t h : hidden)
    if (h == 0) err << "hidden sizes must be positive; ";
  if (batch_size < 1) err << "batch must be >= 1; ";
  if (epochs < 1) err << "epochs must be >= 1; ";
  if (clients < 1) err << "clients must be >= 1; ";
  if (input_dim != 1) err << "input-dim must be 1 for the supported datasets; ";
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) err << "lr must be finite and >= 0; ";
  if (!(test_frac > 0.0 && test_frac < 1.0)) err << "test-frac must lie in (0, 1); ";
  if (dataset != DatasetKind::kSynth) {
    const DatasetProfile p = dataset == DatasetKind::kEcg ? DatasetProfile::ecg() : DatasetProfile::har();
    if (seq_len != 0 && seq_len != p.seq_len)
      err << "seq-len " << seq_len << " disagrees with the " << to_string(dataset) << " profile ("
          << p.seq_len << "); ";
    if (num_classes != 0 && num_classes != p.num_classes())
      err << "classes disagrees with the " << to_string(dataset) << " profile; ";
  } else if (num_classes == 1) {
    err << "classes must be >= 2; ";
  }
  if (!(synth_noise >= 0.0)) err << "synth-noise must be >= 0; ";
  try {
    dp.validate();
  } catch (const ConfigError &e) {
    err << e.what() << "; ";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError("invalid configuration: " + msg.substr(0, msg.size() - 2));
}

std::size_t SplitConfig::hidden_at(std::size_t layer) const {
  return hidden.size() == 1 ? hidden.front() : hidden.at(layer);
}

std::vector<std::size_t> SplitConfig::layer_hidden() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < num_layers; ++l) out.push_back(hidden_at(l));
  return out;
}

std::map<std::string, std::string> SplitConfig::to_map() const {
  std::string hid;
  for (std::size_t i = 0; i < hidden.size(); ++i) hid += (i ? "," : "") + std::to_string(hidden[i]);
  return {
      {"dataset", to_string(dataset)},
      {"data", data_path},
      {"seq-len", std::to_string(seq_len)},
      {"input-dim", std::to_string(input_dim)},
      {"classes", std::to_string(num_classes)},
      {"layers", std::to_string(num_layers)},
      {"hidden", hid},
      {"cut", std::to_string(cut)},
      {"batch", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"lr", real_text(learning_rate)},
      {"clients", std::to_string(clients)},
      {"seed", std::to_string(seed)},
      {"test-frac", real_text(test_frac)},
      {"samples", std::to_string(samples)},
      {"synth-noise", real_text(synth_noise)},
      {"handoff", to_string(handoff)},
      {"wire", to_string(wire)},
      {"eval-every", std::to_string(eval_every)},
      {"dp", dp.enabled ? "true" : "false"},
      {"epsilon", real_text(dp.epsilon)},
      {"delta", real_text(dp.delta)},
      {"clip-norm", real_text(dp.clip_norm)},
      {"noise-gradients", dp.noise_gradients ? "true" : "false"},
      {"dp-seed", std::to_string(dp.rng_seed)},
  };
}

std::string SplitConfig::to_text() const {
  std::string out;
  for (const auto &[k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t SplitConfig::hash() const {
  std::string canon;
  for (const auto &[k, v] : resolved().to_map()) {
    if (kLocalKeys.count(k)) continue;
    canon += k + "=" + v + "\n";
  }
  return wire::fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t *>(canon.data()), canon.size()));
}

}  // namespace lstmsplit

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

#include "lstmsplit/metrics.hpp"

#include <fstream>
#include <json.hpp>

#include "lstmsplit/config.hpp"
#include "lstmsplit/errors.hpp"

namespace lstmsplit {

double accuracy(std::size_t correct, std::size_t total) {
  if (total == 0) throw Error("accuracy: empty evaluation set");
  if (correct > total) throw Error("accuracy: more correct predictions than samples");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

double time_complexity(double clients, double epochs, double batches, double batch_seconds) {
  return clients * epochs * batches * batch_seconds;
}

CommComplexity comm_complexity(const LinkCounters &c) {
  return {c.transit_seconds, c.bytes_sent + c.bytes_received};
}

void write_metrics_csv(const std::filesystem::path &path, const RunMetrics &m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(10);
  out << "client,epoch,train_loss,train_acc,test_acc,tb_sec,comm_bytes\n";
  for (const auto &e : m.epochs) {
    out << e.client << ',' << e.epoch << ',';
    if (e.has_train_stats) out << e.train_loss << ',' << e.train_acc;
    else out << ',';
    out << ',';
    if (e.test_acc) out << *e.test_acc;
    out << ',' << e.tb_sec << ',' << e.comm_bytes << '\n';
  }
  // Summary: final loss/accuracy of the last epoch, run-level test accuracy, t_b and bytes.
  out << "summary," << m.epochs.size() << ',';
  if (!m.epochs.empty() && m.epochs.back().has_train_stats) out << m.epochs.back().train_loss << ',' << m.epochs.back().train_acc;
  else out << ',';
  out << ',';
  if (m.test_accuracy) out << *m.test_accuracy;
  out << ',' << m.mean_batch_seconds << ',' << m.comm_bytes << '\n';
}

std::string run_json(const SplitConfig &cfg, const RunMetrics &m, const std::string &mode) {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["status"] = m.failed ? "failed" : "ok";
  if (m.failed) j["failure"] = m.failure;
  j["seed"] = cfg.seed;
  j["config_hash"] = cfg.hash();
  nlohmann::ordered_json c;
  for (const auto &[k, v] : cfg.to_map()) c[k] = v;
  j["config"] = c;
  j["config_text"] = cfg.to_text();

  nlohmann::ordered_json r;
  if (m.test_accuracy) r["test_accuracy"] = *m.test_accuracy;
  else r["test_accuracy"] = nullptr;
  r["time_complexity_seconds"] = m.tc_seconds;
  r["mean_batch_seconds"] = m.mean_batch_seconds;
  r["batches_per_client_epoch"] = m.batches_per_client_epoch;
  r["comm_seconds"] = m.comm_seconds;
  r["serialize_seconds"] = m.serialize_seconds;
  r["comm_bytes"] = m.comm_bytes;
  r["frames"] = m.frames;
  r["wall_seconds"] = m.wall_seconds;
  r["epochs_recorded"] = m.epochs.size();
  j["metrics"] = r;
  return j.dump(2) + "\n";
}

}  // namespace lstmsplit

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

#include "lstmsplit/harness.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>

#include "lstmsplit/checkpoint.hpp"
#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_outputs(HarnessResult &r, const SplitConfig &cfg, const PartitionPlan *plan,
                   const Checkpoint *ckpt) {
  fs::create_directories(r.out_dir);
  write_metrics_csv(r.out_dir / "metrics.csv", r.metrics);
  write_text(r.out_dir / "run.json", run_json(cfg, r.metrics, r.mode));
  if (plan) write_text(r.out_dir / "partition.manifest", plan->manifest());
  if (ckpt) {
    fs::create_directories(r.out_dir / "checkpoints");
    r.checkpoint = r.out_dir / "checkpoints" / "final.ckpt";
    save_checkpoint(*r.checkpoint, *ckpt);
  }
}

void require_centralized(const SplitConfig &cfg) {
  if (cfg.handoff != HandoffMode::kCentralized) {
    throw ConfigError("peer-to-peer handoff is only available in sim mode");
  }
  if (cfg.wire != WirePrecision::kF32) throw ConfigError("socket sessions always use f32 on the wire");
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

HarnessResult run_simulation(const SplitConfig &raw, const fs::path &out_dir) {
  const SplitConfig cfg = raw.resolved();
  cfg.validate();
  HarnessResult r{"sim", {}, out_dir, std::nullopt};
  PreparedData prepared = prepare_data(cfg);
  RunResult run = run_split_training(cfg, prepared.data, prepared.plan, loopback_links(cfg.wire));
  r.metrics = std::move(run.metrics);
  std::optional<Checkpoint> ckpt;
  if (!r.metrics.failed) ckpt = make_checkpoint(cfg, run.client, run.server, prepared.normalizer);
  write_outputs(r, cfg, &prepared.plan, ckpt ? &*ckpt : nullptr);
  return r;
}

HarnessResult run_server(const SplitConfig &raw, const std::string &bind, const fs::path &out_dir,
                         const std::function<void(std::uint16_t)> &on_listening) {
  const SplitConfig cfg = raw.resolved();
  cfg.validate();
  require_centralized(cfg);
  HarnessResult r{"server", {}, out_dir, std::nullopt};
  const auto wall0 = Clock::now();

  // The server needs no data to train; with it, it can report test accuracy
  // and write a complete checkpoint.
  std::optional<PreparedData> prepared;
  if (cfg.dataset == DatasetKind::kSynth || !cfg.data_path.empty()) prepared = prepare_data(cfg);

  const auto [host, port] = parse_endpoint(bind);
  TcpListener listener(host, port);
  if (on_listening) on_listening(listener.port());

  NetworkInit init = init_network(cfg);
  SplitServer server(cfg, std::move(init.server));
  LinkCounters counters;
  RunMetrics &m = r.metrics;
  try {
    while (server.next_client() <= cfg.clients) {
      std::unique_ptr<TcpSession> session = listener.accept();
      try {
        serve_connection(*session, server);
      } catch (const Error &) {
        counters += session->counters();
        throw;
      }
      counters += session->counters();
      if (const auto &err = server.last_error()) {
        if (err->code == static_cast<std::uint32_t>(wire::ErrorCode::kOutOfOrder)) {
          std::cerr << "lstmsplit server: rejected connection: " << err->message << "\n";
          continue;
        }
        throw SessionError("session aborted: " + err->message);
      }
    }
  } catch (const Error &e) {
    m.failed = true;
    m.failure = e.what();
  }

  m.epochs = server.epochs();
  m.mean_batch_seconds = server.mean_cycle_seconds();
  m.batches_per_client_epoch =
      static_cast<double>(server.batches_served()) / static_cast<double>(cfg.clients * cfg.epochs);
  m.tc_seconds = time_complexity(static_cast<double>(cfg.clients), static_cast<double>(cfg.epochs),
                                 m.batches_per_client_epoch, m.mean_batch_seconds);
  m.comm_seconds = counters.transit_seconds;
  m.serialize_seconds = counters.serialize_seconds;
  m.comm_bytes = counters.bytes_sent + counters.bytes_received;
  m.frames = counters.frames_sent + counters.frames_received;

  std::optional<Checkpoint> ckpt;
  if (!m.failed && prepared && server.relay()) {
    const ClientModel client = install_weights(*server.relay(), cfg, cfg.clients);
    if (!prepared->plan.test_indices.empty()) {
      m.test_accuracy =
          evaluate(client, server.model(), prepared->data, prepared->plan.test_indices, cfg.dp).accuracy;
    }
    ckpt = make_checkpoint(cfg, client, server.model(), prepared->normalizer);
  }
  m.wall_seconds = since(wall0);
  write_outputs(r, cfg, prepared ? &prepared->plan : nullptr, ckpt ? &*ckpt : nullptr);
  return r;
}

HarnessResult run_client(const SplitConfig &raw, const std::string &connect, std::uint32_t shard,
                         const fs::path &out_dir) {
  const SplitConfig cfg = raw.resolved();
  cfg.validate();
  require_centralized(cfg);
  if (shard < 1 || shard > cfg.clients) {
    throw ConfigError("shard must be in 1.." + std::to_string(cfg.clients) + ", got " +
                      std::to_string(shard));
  }
  HarnessResult r{"client", {}, out_dir, std::nullopt};
  const auto wall0 = Clock::now();
  PreparedData prepared = prepare_data(cfg);
  const auto &indices = prepared.plan.client_shards[shard - 1];
  const auto [host, port] = parse_endpoint(connect);

  RunMetrics &m = r.metrics;
  LinkCounters counters;
  double batch_seconds = 0.0;
  std::size_t batches = 0;
  try {
    std::unique_ptr<TcpSession> session = TcpSession::connect(host, port);
    try {
      SplitClient client(cfg, shard, init_network(cfg).client);
      client.connect(*session);
      for (std::uint32_t e = 1; e <= cfg.epochs; ++e) {
        const ClientEpochStats s = client.train_epoch(*session, prepared.data, indices, e);
        EpochRecord rec;
        rec.client = shard;
        rec.epoch = e;
        rec.has_train_stats = false;
        rec.tb_sec = s.batch_seconds / static_cast<double>(s.batches);
        rec.comm_bytes = s.bytes;
        rec.batches = s.batches;
        rec.samples = s.samples;
        m.epochs.push_back(rec);
        batch_seconds += s.batch_seconds;
        batches += s.batches;
      }
      client.finish(*session);
    } catch (const Error &) {
      counters += session->counters();
      throw;
    }
    counters += session->counters();
  } catch (const Error &e) {
    m.failed = true;
    m.failure = e.what();
  }

  m.mean_batch_seconds = batches == 0 ? 0.0 : batch_seconds / static_cast<double>(batches);
  m.batches_per_client_epoch = static_cast<double>(batches) / static_cast<double>(cfg.epochs);
  m.tc_seconds = time_complexity(1.0, static_cast<double>(cfg.epochs), m.batches_per_client_epoch,
                                 m.mean_batch_seconds);
  m.comm_seconds = counters.transit_seconds;
  m.serialize_seconds = counters.serialize_seconds;
  m.comm_bytes = counters.bytes_sent + counters.bytes_received;
  m.frames = counters.frames_sent + counters.frames_received;
  m.wall_seconds = since(wall0);
  write_outputs(r, cfg, &prepared.plan, nullptr);
  return r;
}

EvalResult evaluate_checkpoint(const fs::path &checkpoint, const fs::path &data_csv,
                               const std::optional<SplitConfig> &cfg) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  std::size_t cut = 1;
  DpConfig dp;
  DatasetProfile profile = DatasetProfile::ecg();
  if (cfg) {
    const SplitConfig c = cfg->resolved();
    if (c.hash() != ckpt.config_hash) {
      throw ConfigError("checkpoint was trained under a different configuration");
    }
    if (c.dataset == DatasetKind::kSynth) throw ConfigError("eval needs the ecg or har dataset profile");
    profile = c.dataset == DatasetKind::kEcg ? DatasetProfile::ecg() : DatasetProfile::har();
    cut = c.cut;
    dp = c.dp;
  } else {
    const std::size_t classes = ckpt.head.w.rows();
    if (classes == DatasetProfile::ecg().num_classes()) profile = DatasetProfile::ecg();
    else if (classes == DatasetProfile::har().num_classes()) profile = DatasetProfile::har();
    else throw ConfigError("cannot infer the dataset profile; pass --config");
  }
  if (ckpt.head.w.rows() != profile.num_classes()) {
    throw ConfigError("checkpoint has " + std::to_string(ckpt.head.w.rows()) +
                      " classes, the data profile " + std::to_string(profile.num_classes()));
  }
  LabeledDataset data = load_csv(data_csv, profile);
  ckpt.normalizer.apply(data);
  const NetworkInit net = split_checkpoint(ckpt, cut);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return evaluate(net.client, net.server, data, all, dp);
}

}  // namespace lstmsplit

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

// Split training of a stacked LSTM classifier. Layers 1..cut live on the
// client, layers cut+1..N and the dense head live on the server. Per batch
// the client sends the cut-layer hidden sequence with the labels and gets
// back dLoss/d(activations). Clients are served one after another; each
// hands its trained layers to the next through the server (centralized) or
// directly (peer-to-peer).

#ifndef LSTMSPLIT_SPLIT_HPP_
#define LSTMSPLIT_SPLIT_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lstmsplit/config.hpp"
#include "lstmsplit/data.hpp"
#include "lstmsplit/dp.hpp"
#include "lstmsplit/lstm.hpp"
#include "lstmsplit/metrics.hpp"
#include "lstmsplit/session.hpp"
#include "lstmsplit/wire.hpp"

namespace lstmsplit {

struct ClientModel {
  std::uint32_t client_id = 1;
  std::vector<LstmParams> layers;  // layers 1..cut
};

struct ServerModel {
  std::vector<LstmParams> layers;  // layers cut+1..N
  DenseParams head;
};

struct NetworkInit {
  ClientModel client;
  ServerModel server;
};

/// Seeded weights for the whole stack, drawn layer by layer then the head.
/// Client and server processes each call this and keep their own half.
NetworkInit init_network(const SplitConfig &resolved_cfg);

/// (T tensors of batch x h) <-> (batch x T x h) row-major.
wire::WireTensor pack_sequence(const Sequence &seq);
Sequence unpack_sequence(const wire::WireTensor &t);
/// (T tensors of batch x h) <-> (batch x T*h): one row per sample, for clipping.
Tensor2 flatten_samples(const Sequence &seq);
Sequence unflatten_samples(const Tensor2 &flat, std::size_t steps);

struct ClientForward {
  std::vector<LstmCache> caches;
  Sequence cut;  // h-sequence of layer `cut`
};

ClientForward client_forward(const ClientModel &model, const Sequence &x);
/// BPTT from the cut-layer gradient down through the client layers, then SGD.
void client_backward_update(ClientModel &model, const ClientForward &fwd, const Sequence &d_cut,
                            double eta);

struct ServerBatchResult {
  double loss = 0.0;
  std::size_t correct = 0;
  Sequence cut_grads;  // dLoss / d(received activations)
};

/// Forward through the server layers and head, loss, BPTT, SGD update of the
/// server weights, and the gradient w.r.t. the received activations.
ServerBatchResult server_process_batch(ServerModel &model, const Sequence &activations,
                                       std::span<const Label> labels, double eta);

/// Sample order of a shard for one epoch. `global_epoch` counts epochs across
/// all clients (client k's epoch e is (k-1)*E + e).
std::vector<std::size_t> epoch_order(std::span<const std::size_t> shard, std::uint64_t seed,
                                     std::uint64_t global_epoch);
/// epoch_order cut into batches; the last partial batch is kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::span<const std::size_t> shard,
                                                    std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t global_epoch);

std::vector<wire::WireTensor> client_tensors(const ClientModel &model);
/// WEIGHTS body for the model. Under f32 wire precision the values are
/// narrowed first so the checksum matches what the receiver decodes.
wire::Weights make_weights(const ClientModel &model, WirePrecision precision);
/// Verifies the checksum and the layer shapes against the config.
ClientModel install_weights(const wire::Weights &w, const SplitConfig &cfg, std::uint32_t client_id);

/// In-process stand-in for peer-to-peer handoff: each client publishes its
/// encoded WEIGHTS frame under its id; the next client fetches it.
class PeerDirectory {
 public:
  void publish(std::uint32_t client_id, const wire::Weights &w);
  wire::Weights fetch(std::uint32_t client_id, std::uint64_t expected_checksum) const;
  static std::string address_of(std::uint32_t client_id);

 private:
  std::map<std::uint32_t, std::vector<std::uint8_t>> frames_;
};

struct HandoffEvent {
  std::uint32_t from_client = 0;
  std::uint32_t to_client = 0;
  std::uint64_t checksum = 0;
};

/// Server side of the protocol.
///
/// Per connection: HELLO -> CONFIG, then ACTIVATIONS -> GRADIENTS for every
/// batch, then WEIGHTS -> DONE. Clients must arrive in order 1..K. Any
/// violation is answered with one ERROR frame and the connection ends.
class SplitServer final : public FrameHandler {
 public:
  SplitServer(SplitConfig cfg, ServerModel model);

  std::vector<wire::Message> on_message(const wire::Message &m) override;
  bool connection_finished() const override { return finished_; }
  void begin_connection() override;

  const ServerModel &model() const { return model_; }
  const SplitConfig &config() const { return cfg_; }
  std::vector<EpochRecord> &epochs() { return epochs_; }
  const std::vector<EpochRecord> &epochs() const { return epochs_; }
  const std::vector<HandoffEvent> &handoffs() const { return handoffs_; }
  /// Last client weights uploaded in centralized mode.
  const std::optional<wire::Weights> &relay() const { return relay_; }
  std::uint32_t next_client() const { return next_client_; }
  /// Server-measured mean batch cycle time (between ACTIVATIONS arrivals).
  double mean_cycle_seconds() const;
  std::size_t batches_served() const { return batches_; }
  /// Set when the last connection ended in an ERROR frame.
  const std::optional<wire::ErrorMsg> &last_error() const { return last_error_; }

 private:
  enum class State { kAwaitHello, kTraining, kDone };

  std::vector<wire::Message> fail(wire::ErrorCode code, const std::string &what);
  std::vector<wire::Message> on_hello(const wire::Hello &m);
  std::vector<wire::Message> on_activations(const wire::Activations &m);
  std::vector<wire::Message> on_weights(const wire::Weights &m);

  SplitConfig cfg_;
  std::uint64_t cfg_hash_;
  ServerModel model_;
  DpNoise grad_noise_;
  State state_ = State::kAwaitHello;
  bool finished_ = false;
  std::uint32_t current_client_ = 0;
  std::uint32_t next_client_ = 1;
  std::optional<wire::Weights> relay_;
  std::optional<std::uint32_t> last_peer_;
  std::uint64_t last_peer_checksum_ = 0;
  std::vector<EpochRecord> epochs_;
  std::vector<HandoffEvent> handoffs_;
  std::optional<wire::ErrorMsg> last_error_;
  std::optional<std::chrono::steady_clock::time_point> last_arrival_;
  double cycle_seconds_ = 0.0;
  std::size_t cycles_ = 0;
  std::size_t batches_ = 0;
  double loss_sum_ = 0.0;
  std::size_t correct_ = 0;
  double rec_cycle_seconds_ = 0.0;
  std::size_t rec_cycles_ = 0;
};

struct ClientEpochStats {
  std::size_t batches = 0;
  std::size_t samples = 0;
  double batch_seconds = 0.0;  // summed wall time of every batch
  std::uint64_t bytes = 0;
};

/// Client side of the protocol for one client id.
class SplitClient {
 public:
  SplitClient(SplitConfig cfg, std::uint32_t client_id, ClientModel initial,
              PeerDirectory *peers = nullptr);

  /// HELLO / CONFIG exchange; installs handed-off weights when the server offers them.
  void connect(Session &s);
  ClientEpochStats train_epoch(Session &s, const LabeledDataset &data,
                               std::span<const std::size_t> shard, std::uint32_t epoch);
  /// Uploads the final weights (WEIGHTS) and waits for DONE.
  void finish(Session &s);

  const ClientModel &model() const { return model_; }
  /// Weights the client started training from, as installed. After a
  /// handoff client_id names the client they came from.
  const std::optional<wire::Weights> &initial_weights() const { return initial_; }
  /// What finish() sent (full weights, also in peer-to-peer mode).
  const std::optional<wire::Weights> &final_weights() const { return final_; }

 private:
  wire::Message expect(Session &s, wire::MsgType type);

  SplitConfig cfg_;
  std::uint32_t id_;
  ClientModel model_;
  PeerDirectory *peers_;
  DpNoise noise_;
  std::optional<wire::Weights> initial_;
  std::optional<wire::Weights> final_;
};

struct EvalResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;  // percent
  std::vector<Label> predictions;
};

/// Forward only. With DP enabled the cut activations are clipped (no noise)
/// so the server sees the scale it was trained on.
EvalResult evaluate(const ClientModel &client, const ServerModel &server, const LabeledDataset &data,
                    std::span<const std::size_t> indices, const DpConfig &dp);

using LinkFactory = std::function<std::unique_ptr<Session>(SplitServer &, std::uint32_t client_id)>;

/// In-process links driving the server synchronously on the caller's thread.
LinkFactory loopback_links(WirePrecision precision);

struct RunResult {
  RunMetrics metrics;
  ClientModel client;  // final client layers
  ServerModel server;
  std::vector<HandoffEvent> handoffs;
  std::vector<std::vector<TraceEntry>> traces;  // client-side trace per client
  std::vector<wire::Weights> initial_weights;   // per client
  std::vector<wire::Weights> final_weights;     // per client
};

/// Trains clients 1..K in order against one persistent server, then evaluates
/// on the shared test set. Session failures mark the run failed and keep the
/// metrics gathered so far.
RunResult run_split_training(const SplitConfig &cfg, const LabeledDataset &data,
                             const PartitionPlan &plan, const LinkFactory &links);

/// Loads or synthesises the configured dataset, partitions it and z-scores it
/// with statistics of the training shards only.
struct PreparedData {
  LabeledDataset data;
  PartitionPlan plan;
  Normalizer normalizer;
};
PreparedData prepare_data(const SplitConfig &cfg);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_SPLIT_HPP_

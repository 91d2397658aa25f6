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

// lstmsplit command line: sim, server, client and eval subcommands over the
// C interface of liblstmsplit.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lstmsplit/lstmsplit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Settings shared by every subcommand; each maps onto a config key.
struct CommonFlags {
  std::map<std::string, std::string> values;
  bool dp = false;
  std::vector<std::string> extra;  // --set key=value
  std::string out = "out";

  void attach(CLI::App &cmd, bool with_data = true) {
    static const std::vector<std::pair<std::string, std::string>> kKeys = {
        {"dataset", "ecg | har | synth"},
        {"data", "CSV file with label,x1..xT rows"},
        {"clients", "number of clients K"},
        {"epochs", "epochs per client E"},
        {"batch", "batch size"},
        {"lr", "SGD learning rate"},
        {"hidden", "hidden size, or a comma list per layer"},
        {"layers", "number of LSTM layers"},
        {"cut", "layers kept on the client"},
        {"seed", "seed for init, partition and shuffling"},
        {"epsilon", "privacy budget epsilon (inf allowed)"},
        {"delta", "privacy budget delta"},
        {"clip-norm", "per-sample L2 clip of the cut activations"},
        {"handoff", "centralized | p2p (sim only)"},
        {"wire", "f32 | f64 (sim only)"},
        {"samples", "synthetic dataset size"},
        {"eval-every", "test accuracy every N epochs (sim)"},
    };
    for (const auto &[key, help] : kKeys) {
      if (key == "data" && !with_data) continue;
      cmd.add_option_function<std::string>(
          "--" + key, [this, key = key](const std::string &v) { values[key] = v; }, help)
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    cmd.add_flag("--dp", dp, "perturb cut-layer activations with the Gaussian mechanism");
    cmd.add_option("--set", extra, "any config key as key=value (repeatable)");
    cmd.add_option("--out", out, "output directory")
        ->capture_default_str()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
};

struct Failure {
  int code;
};

int exit_code(lsp_status s) {
  return s == LSP_ERR_CONFIG || s == LSP_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
}

void check(lsp_status s) {
  if (s != LSP_OK) {
    std::fprintf(stderr, "lstmsplit: %s: %s\n", lsp_status_name(s), lsp_last_error());
    throw Failure{exit_code(s)};
  }
}

class Config {
 public:
  Config() { check(lsp_config_create(&cfg_)); }
  ~Config() { lsp_config_destroy(cfg_); }
  Config(const Config &) = delete;
  Config &operator=(const Config &) = delete;
  lsp_config *get() { return cfg_; }

  void apply(const std::string &file, const CommonFlags &flags) {
    if (!file.empty()) check(lsp_config_load_file(cfg_, file.c_str()));
    for (const auto &[k, v] : flags.values) check(lsp_config_set(cfg_, k.c_str(), v.c_str()));
    if (flags.dp) check(lsp_config_set(cfg_, "dp", "true"));
    for (const auto &kv : flags.extra) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "lstmsplit: --set expects key=value, got '%s'\n", kv.c_str());
        throw Failure{kExitUsage};
      }
      check(lsp_config_set(cfg_, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    check(lsp_config_validate(cfg_));
  }

 private:
  lsp_config *cfg_ = nullptr;
};

int report(lsp_status s, lsp_run *run, const std::string &out_dir) {
  if (!run) {
    check(s);
    return kExitFailure;
  }
  double acc = 0.0;
  if (lsp_run_test_accuracy(run, &acc)) std::printf("test_accuracy_percent %.4f\n", acc);
  std::printf("time_complexity_seconds %.6f\n", lsp_run_time_complexity(run));
  std::printf("mean_batch_seconds %.6f\n", lsp_run_mean_batch_seconds(run));
  std::printf("comm_seconds %.6f\n", lsp_run_comm_seconds(run));
  std::printf("serialize_seconds %.6f\n", lsp_run_serialize_seconds(run));
  std::printf("comm_bytes %llu\n", static_cast<unsigned long long>(lsp_run_comm_bytes(run)));
  if (const char *ckpt = lsp_run_checkpoint(run)) std::printf("checkpoint %s\n", ckpt);
  std::printf("output %s\n", out_dir.c_str());
  const bool failed = lsp_run_failed(run) != 0;
  if (failed) std::fprintf(stderr, "lstmsplit: run failed: %s\n", lsp_run_failure(run));
  lsp_run_destroy(run);
  return failed ? kExitFailure : kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Split learning of LSTM classifiers across sequential clients"};
  app.require_subcommand(1);

  std::string config_file, bind, connect, checkpoint, eval_data;
  std::uint32_t shard = 0;

  CommonFlags sim_flags, server_flags, client_flags, eval_flags;

  auto *sim = app.add_subcommand("sim", "run all clients and the server in one process");
  sim->add_option("--config", config_file, "config file (key = value lines)");
  sim_flags.attach(*sim);

  auto *server = app.add_subcommand("server", "serve clients 1..K over TCP");
  server->add_option("--bind", bind, "HOST:PORT to listen on")->required();
  server->add_option("--config", config_file, "config file shared with the clients")->required();
  server_flags.attach(*server);

  auto *client = app.add_subcommand("client", "train one shard against a server");
  client->add_option("--connect", connect, "server HOST:PORT")->required();
  client->add_option("--config", config_file, "config file shared with the server")->required();
  client->add_option("--shard", shard, "1-based shard / client id")->required();
  client_flags.attach(*client);

  auto *eval = app.add_subcommand("eval", "accuracy of a checkpoint on a CSV file");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "CSV file to evaluate")->required();
  eval->add_option("--config", config_file, "config the checkpoint was trained with");
  eval_flags.attach(*eval, /*with_data=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    Config cfg;
    if (*sim) {
      cfg.apply(config_file, sim_flags);
      lsp_run *run = nullptr;
      const lsp_status s = lsp_run_sim(cfg.get(), sim_flags.out.c_str(), &run);
      return report(s, run, sim_flags.out);
    }
    if (*server) {
      cfg.apply(config_file, server_flags);
      lsp_run *run = nullptr;
      const lsp_status s = lsp_run_server(
          cfg.get(), bind.c_str(), server_flags.out.c_str(),
          [](std::uint16_t port, void *) {
            std::printf("listening %u\n", static_cast<unsigned>(port));
            std::fflush(stdout);
          },
          nullptr, &run);
      return report(s, run, server_flags.out);
    }
    if (*client) {
      cfg.apply(config_file, client_flags);
      lsp_run *run = nullptr;
      const lsp_status s = lsp_run_client(cfg.get(), connect.c_str(), shard, client_flags.out.c_str(), &run);
      return report(s, run, client_flags.out);
    }
    if (*eval) {
      const bool with_config = !config_file.empty() || !eval_flags.values.empty() || eval_flags.dp ||
                               !eval_flags.extra.empty();
      if (with_config) cfg.apply(config_file, eval_flags);
      double acc = 0.0;
      size_t total = 0;
      check(lsp_evaluate_checkpoint(with_config ? cfg.get() : nullptr, checkpoint.c_str(),
                                    eval_data.c_str(), &acc, &total));
      std::printf("samples %zu\n", total);
      std::printf("test_accuracy_percent %.4f\n", acc);
      return kExitOk;
    }
  } catch (const Failure &f) {
    return f.code;
  }
  return kExitUsage;
}

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

#include "lstmsplit/lstmsplit.h"

#include <cstring>
#include <exception>
#include <string>

#include "lstmsplit/config.hpp"
#include "lstmsplit/errors.hpp"
#include "lstmsplit/harness.hpp"

struct lsp_config {
  lstmsplit::SplitConfig cfg;
};

struct lsp_run {
  lstmsplit::HarnessResult result;
  std::string checkpoint;
};

namespace {

thread_local std::string g_last_error;

lsp_status fail(lsp_status s, const std::string &what) {
  g_last_error = what;
  return s;
}

// Maps the exception in flight to a status.
lsp_status translate() {
  try {
    throw;
  } catch (const lstmsplit::ConfigError &e) {
    return fail(LSP_ERR_CONFIG, e.what());
  } catch (const lstmsplit::ParseError &e) {
    return fail(LSP_ERR_PARSE, e.what());
  } catch (const lstmsplit::DimensionError &e) {
    return fail(LSP_ERR_DIMENSION, e.what());
  } catch (const lstmsplit::ProtocolError &e) {
    return fail(LSP_ERR_PROTOCOL, e.what());
  } catch (const lstmsplit::SessionError &e) {
    return fail(LSP_ERR_SESSION, e.what());
  } catch (const lstmsplit::HandoffError &e) {
    return fail(LSP_ERR_HANDOFF, e.what());
  } catch (const std::exception &e) {
    return fail(LSP_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(LSP_ERR_RUNTIME, "unknown error");
  }
}

template <typename F>
lsp_status guarded(F &&f) {
  try {
    return f();
  } catch (...) {
    return translate();
  }
}

lsp_status finish_run(lstmsplit::HarnessResult &&r, lsp_run **out) {
  auto *run = new lsp_run{std::move(r), {}};
  if (run->result.checkpoint) run->checkpoint = run->result.checkpoint->string();
  *out = run;
  if (run->result.metrics.failed) return fail(LSP_ERR_RUN_FAILED, run->result.metrics.failure);
  return LSP_OK;
}

}  // namespace

extern "C" {

const char *lsp_last_error(void) { return g_last_error.c_str(); }

const char *lsp_status_name(lsp_status status) {
  switch (status) {
    case LSP_OK: return "ok";
    case LSP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LSP_ERR_CONFIG: return "configuration error";
    case LSP_ERR_PARSE: return "parse error";
    case LSP_ERR_DIMENSION: return "dimension error";
    case LSP_ERR_PROTOCOL: return "protocol error";
    case LSP_ERR_SESSION: return "session error";
    case LSP_ERR_HANDOFF: return "handoff error";
    case LSP_ERR_RUNTIME: return "runtime error";
    case LSP_ERR_RUN_FAILED: return "run failed";
  }
  return "unknown status";
}

const char *lsp_version(void) { return "1.0.0"; }

lsp_status lsp_config_create(lsp_config **out) {
  if (!out) return fail(LSP_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = new lsp_config{};
    return LSP_OK;
  });
}

void lsp_config_destroy(lsp_config *cfg) { delete cfg; }

lsp_status lsp_config_load_file(lsp_config *cfg, const char *path) {
  if (!cfg || !path) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.load_file(path);
    return LSP_OK;
  });
}

lsp_status lsp_config_set(lsp_config *cfg, const char *key, const char *value) {
  if (!cfg || !key || !value) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.set(key, value);
    return LSP_OK;
  });
}

lsp_status lsp_config_validate(const lsp_config *cfg) {
  if (!cfg) return fail(LSP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    cfg->cfg.resolved().validate();
    return LSP_OK;
  });
}

lsp_status lsp_config_hash(const lsp_config *cfg, uint64_t *out) {
  if (!cfg || !out) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = cfg->cfg.hash();
    return LSP_OK;
  });
}

lsp_status lsp_config_text(const lsp_config *cfg, char *buf, size_t cap, size_t *needed) {
  if (!cfg) return fail(LSP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    const std::string text = cfg->cfg.resolved().to_text();
    if (needed) *needed = text.size() + 1;
    if (buf) {
      if (cap < text.size() + 1) return fail(LSP_ERR_INVALID_ARGUMENT, "buffer too small");
      std::memcpy(buf, text.c_str(), text.size() + 1);
    }
    return LSP_OK;
  });
}

lsp_status lsp_run_sim(const lsp_config *cfg, const char *out_dir, lsp_run **out) {
  if (!cfg || !out_dir || !out) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return finish_run(lstmsplit::run_simulation(cfg->cfg, out_dir), out); });
}

lsp_status lsp_run_server(const lsp_config *cfg, const char *bind, const char *out_dir,
                          lsp_listen_fn on_listening, void *user, lsp_run **out) {
  if (!cfg || !bind || !out_dir || !out) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::function<void(std::uint16_t)> cb;
    if (on_listening) cb = [&](std::uint16_t port) { on_listening(port, user); };
    return finish_run(lstmsplit::run_server(cfg->cfg, bind, out_dir, cb), out);
  });
}

lsp_status lsp_run_client(const lsp_config *cfg, const char *connect, uint32_t shard,
                          const char *out_dir, lsp_run **out) {
  if (!cfg || !connect || !out_dir || !out) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return finish_run(lstmsplit::run_client(cfg->cfg, connect, shard, out_dir), out); });
}

void lsp_run_destroy(lsp_run *run) { delete run; }

int lsp_run_failed(const lsp_run *run) { return run && run->result.metrics.failed ? 1 : 0; }

const char *lsp_run_failure(const lsp_run *run) {
  return run ? run->result.metrics.failure.c_str() : "";
}

int lsp_run_test_accuracy(const lsp_run *run, double *out) {
  if (!run || !run->result.metrics.test_accuracy) return 0;
  if (out) *out = *run->result.metrics.test_accuracy;
  return 1;
}

double lsp_run_time_complexity(const lsp_run *run) { return run ? run->result.metrics.tc_seconds : 0.0; }

double lsp_run_mean_batch_seconds(const lsp_run *run) {
  return run ? run->result.metrics.mean_batch_seconds : 0.0;
}

double lsp_run_comm_seconds(const lsp_run *run) { return run ? run->result.metrics.comm_seconds : 0.0; }

double lsp_run_serialize_seconds(const lsp_run *run) {
  return run ? run->result.metrics.serialize_seconds : 0.0;
}

uint64_t lsp_run_comm_bytes(const lsp_run *run) { return run ? run->result.metrics.comm_bytes : 0; }

size_t lsp_run_epoch_count(const lsp_run *run) { return run ? run->result.metrics.epochs.size() : 0; }

lsp_status lsp_run_epoch(const lsp_run *run, size_t index, lsp_epoch_record *out) {
  if (!run || !out) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= run->result.metrics.epochs.size()) {
    return fail(LSP_ERR_INVALID_ARGUMENT, "epoch index out of range");
  }
  const auto &e = run->result.metrics.epochs[index];
  *out = lsp_epoch_record{e.client,
                          e.epoch,
                          e.has_train_stats ? 1 : 0,
                          e.train_loss,
                          e.train_acc,
                          e.test_acc ? 1 : 0,
                          e.test_acc.value_or(0.0),
                          e.tb_sec,
                          e.comm_bytes};
  return LSP_OK;
}

const char *lsp_run_checkpoint(const lsp_run *run) {
  return run && !run->checkpoint.empty() ? run->checkpoint.c_str() : nullptr;
}

lsp_status lsp_evaluate_checkpoint(const lsp_config *cfg, const char *checkpoint, const char *data_csv,
                                   double *accuracy, size_t *total) {
  if (!checkpoint || !data_csv || !accuracy) return fail(LSP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::optional<lstmsplit::SplitConfig> c;
    if (cfg) c = cfg->cfg;
    const lstmsplit::EvalResult r = lstmsplit::evaluate_checkpoint(checkpoint, data_csv, c);
    *accuracy = r.accuracy;
    if (total) *total = r.total;
    return LSP_OK;
  });
}

}  // extern "C"

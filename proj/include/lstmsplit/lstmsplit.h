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

/* C interface to lstmsplit. All objects are opaque handles; every call that
 * can fail returns an lsp_status and leaves a message for lsp_last_error()
 * (per thread, valid until the next failing call on that thread). */

#ifndef LSTMSPLIT_LSTMSPLIT_H_
#define LSTMSPLIT_LSTMSPLIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LSP_API __declspec(dllexport)
#else
#define LSP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsp_status {
  LSP_OK = 0,
  LSP_ERR_INVALID_ARGUMENT = 1, /* null handle or pointer */
  LSP_ERR_CONFIG = 2,           /* unknown key, bad value, invalid combination */
  LSP_ERR_PARSE = 3,            /* malformed data or checkpoint file */
  LSP_ERR_DIMENSION = 4,        /* shape mismatch */
  LSP_ERR_PROTOCOL = 5,         /* malformed or unexpected frame */
  LSP_ERR_SESSION = 6,          /* connection failure or server rejection */
  LSP_ERR_HANDOFF = 7,          /* weight checksum or shape mismatch on handoff */
  LSP_ERR_RUNTIME = 8,          /* any other failure */
  LSP_ERR_RUN_FAILED = 9        /* run aborted; partial results are in the run handle */
} lsp_status;

typedef struct lsp_config lsp_config;
typedef struct lsp_run lsp_run;

typedef struct lsp_epoch_record {
  uint32_t client;
  uint32_t epoch;
  int has_train_stats;
  double train_loss;
  double train_acc;
  int has_test_acc;
  double test_acc;
  double tb_sec;
  uint64_t comm_bytes;
} lsp_epoch_record;

typedef void (*lsp_listen_fn)(uint16_t port, void *user);

LSP_API const char *lsp_last_error(void);
LSP_API const char *lsp_status_name(lsp_status status);
LSP_API const char *lsp_version(void);

LSP_API lsp_status lsp_config_create(lsp_config **out);
LSP_API void lsp_config_destroy(lsp_config *cfg);
LSP_API lsp_status lsp_config_load_file(lsp_config *cfg, const char *path);
LSP_API lsp_status lsp_config_set(lsp_config *cfg, const char *key, const char *value);
LSP_API lsp_status lsp_config_validate(const lsp_config *cfg);
LSP_API lsp_status lsp_config_hash(const lsp_config *cfg, uint64_t *out);
/* Writes the resolved config as "key = value" lines. *needed receives the
 * size including the terminator; buf may be NULL to query it. */
LSP_API lsp_status lsp_config_text(const lsp_config *cfg, char *buf, size_t cap, size_t *needed);

/* The run functions set *out whenever a run was started, also on
 * LSP_ERR_RUN_FAILED. Release with lsp_run_destroy. */
LSP_API lsp_status lsp_run_sim(const lsp_config *cfg, const char *out_dir, lsp_run **out);
LSP_API lsp_status lsp_run_server(const lsp_config *cfg, const char *bind, const char *out_dir,
                                  lsp_listen_fn on_listening, void *user, lsp_run **out);
LSP_API lsp_status lsp_run_client(const lsp_config *cfg, const char *connect, uint32_t shard,
                                  const char *out_dir, lsp_run **out);
LSP_API void lsp_run_destroy(lsp_run *run);

LSP_API int lsp_run_failed(const lsp_run *run);
LSP_API const char *lsp_run_failure(const lsp_run *run);
/* Returns 1 and fills *out when a test accuracy (percent) is available. */
LSP_API int lsp_run_test_accuracy(const lsp_run *run, double *out);
LSP_API double lsp_run_time_complexity(const lsp_run *run);
LSP_API double lsp_run_mean_batch_seconds(const lsp_run *run);
LSP_API double lsp_run_comm_seconds(const lsp_run *run);
LSP_API double lsp_run_serialize_seconds(const lsp_run *run);
LSP_API uint64_t lsp_run_comm_bytes(const lsp_run *run);
LSP_API size_t lsp_run_epoch_count(const lsp_run *run);
LSP_API lsp_status lsp_run_epoch(const lsp_run *run, size_t index, lsp_epoch_record *out);
/* Path of checkpoints/final.ckpt, or NULL when none was written. */
LSP_API const char *lsp_run_checkpoint(const lsp_run *run);

/* Accuracy of a checkpoint on every row of a CSV. cfg may be NULL. */
LSP_API lsp_status lsp_evaluate_checkpoint(const lsp_config *cfg, const char *checkpoint,
                                           const char *data_csv, double *accuracy, size_t *total);

#ifdef __cplusplus
}
#endif

#endif /* LSTMSPLIT_LSTMSPLIT_H_ */

/**
 * Copyright 2026 The Medformer Authors
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
#ifndef MDF_MDF_H_
#define MDF_MDF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define MDF_API __attribute__((visibility("default")))
#else
#define MDF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdf_status {
  MDF_OK = 0,
  MDF_ERR_INVALID_ARGUMENT = 1,
  MDF_ERR_CONFIG = 2,
  MDF_ERR_PARSE = 3,
  MDF_ERR_LOOKUP = 4,
  MDF_ERR_LOAD = 5,
  MDF_ERR_INGESTION = 6,
  MDF_ERR_DIMENSION = 7,
  MDF_ERR_NUMERIC = 8,
  MDF_ERR_DIVERGENCE = 9,
  MDF_ERR_INPUT = 10,
  MDF_ERR_INTERNAL = 99
} mdf_status;

typedef struct mdf_run_config mdf_run_config;
typedef struct mdf_model mdf_model;

MDF_API const char *mdf_version(void);
MDF_API const char *mdf_status_name(mdf_status status);
/* Message of the last failing call on this thread; "" when none. */
MDF_API const char *mdf_last_error(void);

/* 0 restores the default (MEDFORMER_THREADS, else all cores). */
MDF_API void mdf_set_threads(size_t n);
MDF_API size_t mdf_get_threads(void);

/* Strings returned through char** are owned by the caller. */
MDF_API void mdf_string_free(char *s);

/* ---- run configs ---- */

MDF_API mdf_status mdf_config_load(const char *path, mdf_run_config **out);
/* base_dir may be NULL (current directory). */
MDF_API mdf_status mdf_config_parse(const char *text, const char *base_dir, mdf_run_config **out);
MDF_API void mdf_config_free(mdf_run_config *cfg);

MDF_API mdf_status mdf_config_set_seed(mdf_run_config *cfg, uint64_t seed);
MDF_API mdf_status mdf_config_set_steps(mdf_run_config *cfg, size_t steps);
MDF_API mdf_status mdf_config_set_lr(mdf_run_config *cfg, double lr);
MDF_API mdf_status mdf_config_set_out_dir(mdf_run_config *cfg, const char *dir);
MDF_API mdf_status mdf_config_set_from(mdf_run_config *cfg, const char *checkpoint);
/* "K=2,reps=4" */
MDF_API mdf_status mdf_config_set_ttsa(mdf_run_config *cfg, const char *ttsa);

/* mode: train, multitask, ssl-pretrain, finetune, eval. On success
 * *summary_json (if non-NULL) receives the run summary. */
MDF_API mdf_status mdf_run(const mdf_run_config *cfg, const char *mode, char **summary_json);

/* JSON with version, config digest, parameter count and latent names. */
MDF_API mdf_status mdf_inspect_checkpoint(const char *path, char **summary_json);

/* ---- models ---- */

MDF_API mdf_status mdf_model_load(const char *path, mdf_model **out);
MDF_API void mdf_model_free(mdf_model *model);

MDF_API mdf_status mdf_model_parameter_count(const mdf_model *model, size_t *out);
MDF_API mdf_status mdf_model_task_count(const mdf_model *model, size_t *out);
/* The returned name lives as long as the model. */
MDF_API mdf_status mdf_model_task_name(const mdf_model *model, size_t index, const char **out);
/* Per-sample input shape (C, H, W) or (C, D, H, W). */
MDF_API mdf_status mdf_model_input_shape(const mdf_model *model, const char *task, size_t *shape, size_t capacity,
                                         size_t *rank);
MDF_API mdf_status mdf_model_output_dim(const mdf_model *model, const char *task, size_t *out);
/* input: batch samples, row-major, values in [0, 1].
 * logits: batch * output_dim values. */
MDF_API mdf_status mdf_model_forward(const mdf_model *model, const char *task, const double *input, size_t batch,
                                     double *logits, size_t logits_len);
/* 16 hex digits plus the terminator. */
MDF_API mdf_status mdf_model_digest(const mdf_model *model, char out[17]);

#ifdef __cplusplus
}
#endif

#endif /* MDF_MDF_H_ */

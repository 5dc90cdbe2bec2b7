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
/* Plain C consumer of the public header. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "mdf/mdf.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char *kConfig =
    "seed: 5\n"
    "model:\n"
    "  hidden_dim: 12\n"
    "  main_layers: 1\n"
    "  adapt_in_layers: 1\n"
    "  adapt_out_layers: 1\n"
    "  num_heads: 2\n"
    "  latent_tokens: 3\n"
    "  latent_dim: 6\n"
    "  dtype: f64\n"
    "tasks:\n"
    "  - name: dots\n"
    "    dims: 2\n"
    "    type: binary\n"
    "    num_classes: 2\n"
    "    channels: 1\n"
    "    side: 8\n"
    "    modality: synthetic\n"
    "    body_part: phantom\n"
    "    samples_per_class: 4\n"
    "train:\n"
    "  steps: 4\n"
    "  batch_size: 4\n"
    "  eval_every: 2\n";

int main(int argc, char **argv) {
  const char *dir = argc > 1 ? argv[1] : "capi_out";
  char ckpt[1024];
  snprintf(ckpt, sizeof ckpt, "%s/best.ckpt", dir);

  EXPECT(strcmp(mdf_version(), "0.1.0") == 0);
  EXPECT(strcmp(mdf_status_name(MDF_ERR_DIVERGENCE), "divergence") == 0);
  mdf_set_threads(2);
  EXPECT(mdf_get_threads() == 2);
  mdf_set_threads(0);

  /* argument and parse errors */
  mdf_run_config *cfg = NULL;
  EXPECT(mdf_config_parse(NULL, NULL, &cfg) == MDF_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(mdf_last_error()) > 0);
  EXPECT(mdf_config_parse("seed: 1\nnope: 2\n", NULL, &cfg) == MDF_ERR_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strstr(mdf_last_error(), "nope") != NULL);
  EXPECT(mdf_config_parse("seed: {a: 1}\n", NULL, &cfg) == MDF_ERR_PARSE);
  EXPECT(mdf_config_load("/nonexistent/run.yaml", &cfg) == MDF_ERR_CONFIG);

  /* a short run */
  EXPECT(mdf_config_parse(kConfig, NULL, &cfg) == MDF_OK);
  EXPECT(mdf_config_set_out_dir(cfg, dir) == MDF_OK);
  EXPECT(mdf_config_set_steps(cfg, 0) == MDF_ERR_INVALID_ARGUMENT);
  EXPECT(mdf_config_set_ttsa(cfg, "K=two") == MDF_ERR_CONFIG);
  char *summary = NULL;
  EXPECT(mdf_run(cfg, "sideways", &summary) == MDF_ERR_CONFIG);
  EXPECT(mdf_run(cfg, "train", &summary) == MDF_OK);
  EXPECT(summary != NULL && strstr(summary, "\"mode\": \"train\"") != NULL);
  mdf_string_free(summary);
  EXPECT(mdf_run(cfg, "finetune", NULL) == MDF_ERR_CONFIG);
  mdf_config_free(cfg);

  /* inspect and load */
  char *info = NULL;
  EXPECT(mdf_inspect_checkpoint(ckpt, &info) == MDF_OK);
  EXPECT(info != NULL && strstr(info, "\"version\": 1") != NULL);
  mdf_string_free(info);
  EXPECT(mdf_inspect_checkpoint("/nonexistent.ckpt", &info) == MDF_ERR_LOAD);

  mdf_model *model = NULL;
  EXPECT(mdf_model_load("/nonexistent.ckpt", &model) == MDF_ERR_LOAD);
  EXPECT(mdf_model_load(ckpt, &model) == MDF_OK);
  if (model != NULL) {
    size_t n = 0, tasks = 0, rank = 0, out_dim = 0, shape[4] = {0};
    const char *name = NULL;
    EXPECT(mdf_model_parameter_count(model, &n) == MDF_OK && n > 0);
    EXPECT(mdf_model_task_count(model, &tasks) == MDF_OK && tasks == 1);
    EXPECT(mdf_model_task_name(model, 0, &name) == MDF_OK && strcmp(name, "dots") == 0);
    EXPECT(mdf_model_task_name(model, 1, &name) == MDF_ERR_INVALID_ARGUMENT);
    EXPECT(mdf_model_input_shape(model, "dots", shape, 4, &rank) == MDF_OK);
    EXPECT(rank == 3 && shape[0] == 1 && shape[1] == 8 && shape[2] == 8);
    EXPECT(mdf_model_input_shape(model, "nosuch", shape, 4, &rank) == MDF_ERR_LOOKUP);
    EXPECT(mdf_model_output_dim(model, "dots", &out_dim) == MDF_OK && out_dim == 1);

    double input[2 * 64];
    for (int i = 0; i < 128; ++i) input[i] = (double)(i % 17) / 16.0;
    double a[2], b[2], c[3];
    EXPECT(mdf_model_forward(model, "dots", input, 2, a, 2) == MDF_OK);
    EXPECT(mdf_model_forward(model, "dots", input, 2, b, 2) == MDF_OK);
    EXPECT(a[0] == b[0] && a[1] == b[1]);
    EXPECT(isfinite(a[0]) && isfinite(a[1]));
    EXPECT(mdf_model_forward(model, "dots", input, 2, c, 3) == MDF_ERR_INPUT);

    char d1[17], d2[17];
    EXPECT(mdf_model_digest(model, d1) == MDF_OK && strlen(d1) == 16);
    mdf_model *again = NULL;
    EXPECT(mdf_model_load(ckpt, &again) == MDF_OK);
    EXPECT(again != NULL && mdf_model_digest(again, d2) == MDF_OK && strcmp(d1, d2) == 0);
    mdf_model_free(again);
    mdf_model_free(model);
  }
  mdf_model_free(NULL);
  mdf_config_free(NULL);

  if (failures > 0) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}

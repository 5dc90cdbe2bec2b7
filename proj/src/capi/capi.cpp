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
#include "mdf/mdf.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "mdf/checkpoint.hpp"
#include "mdf/error.hpp"
#include "mdf/run.hpp"
#include "mdf/threads.hpp"

struct mdf_run_config {
  mdf::RunConfig cfg;
};

struct mdf_model {
  mdf::Medformer model;
};

namespace {

thread_local std::string g_last_error;

mdf_status fail(mdf_status s, const char *what) {
  g_last_error = what;
  return s;
}

template <typename F>
mdf_status guarded(F &&f) {
  try {
    g_last_error.clear();
    f();
    return MDF_OK;
  } catch (const mdf::DivergenceError &e) {
    return fail(MDF_ERR_DIVERGENCE, e.what());
  } catch (const mdf::ParseError &e) {
    return fail(MDF_ERR_PARSE, e.what());
  } catch (const mdf::ConfigError &e) {
    return fail(MDF_ERR_CONFIG, e.what());
  } catch (const mdf::LookupError &e) {
    return fail(MDF_ERR_LOOKUP, e.what());
  } catch (const mdf::LoadError &e) {
    return fail(MDF_ERR_LOAD, e.what());
  } catch (const mdf::IngestionError &e) {
    return fail(MDF_ERR_INGESTION, e.what());
  } catch (const mdf::DimensionError &e) {
    return fail(MDF_ERR_DIMENSION, e.what());
  } catch (const mdf::NumericError &e) {
    return fail(MDF_ERR_NUMERIC, e.what());
  } catch (const mdf::InputError &e) {
    return fail(MDF_ERR_INPUT, e.what());
  } catch (const mdf::LabelError &e) {
    return fail(MDF_ERR_INPUT, e.what());
  } catch (const std::exception &e) {
    return fail(MDF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MDF_ERR_INTERNAL, "unknown exception");
  }
}

char *copy_string(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define MDF_REQUIRE(cond, msg) \
  if (!(cond)) return fail(MDF_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char *mdf_version(void) { return "0.1.0"; }

const char *mdf_status_name(mdf_status status) {
  switch (status) {
    case MDF_OK:
      return "ok";
    case MDF_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case MDF_ERR_CONFIG:
      return "config error";
    case MDF_ERR_PARSE:
      return "parse error";
    case MDF_ERR_LOOKUP:
      return "lookup error";
    case MDF_ERR_LOAD:
      return "load error";
    case MDF_ERR_INGESTION:
      return "ingestion error";
    case MDF_ERR_DIMENSION:
      return "dimension error";
    case MDF_ERR_NUMERIC:
      return "numeric error";
    case MDF_ERR_DIVERGENCE:
      return "divergence";
    case MDF_ERR_INPUT:
      return "input error";
    case MDF_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char *mdf_last_error(void) { return g_last_error.c_str(); }

void mdf_set_threads(size_t n) { mdf::set_num_threads(n); }
size_t mdf_get_threads(void) { return mdf::num_threads(); }

void mdf_string_free(char *s) { std::free(s); }

mdf_status mdf_config_load(const char *path, mdf_run_config **out) {
  MDF_REQUIRE(path != nullptr && out != nullptr, "mdf_config_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new mdf_run_config{mdf::load_run_config(path)}; });
}

mdf_status mdf_config_parse(const char *text, const char *base_dir, mdf_run_config **out) {
  MDF_REQUIRE(text != nullptr && out != nullptr, "mdf_config_parse: null argument");
  *out = nullptr;
  return guarded([&] { *out = new mdf_run_config{mdf::parse_run_config(text, base_dir ? base_dir : ".")}; });
}

void mdf_config_free(mdf_run_config *cfg) { delete cfg; }

mdf_status mdf_config_set_seed(mdf_run_config *cfg, uint64_t seed) {
  MDF_REQUIRE(cfg != nullptr, "mdf_config_set_seed: null config");
  cfg->cfg.seed = seed;
  return MDF_OK;
}

mdf_status mdf_config_set_steps(mdf_run_config *cfg, size_t steps) {
  MDF_REQUIRE(cfg != nullptr, "mdf_config_set_steps: null config");
  MDF_REQUIRE(steps > 0, "steps must be positive");
  mdf::RunOverrides ov;
  ov.steps = steps;
  mdf::apply_overrides(cfg->cfg, ov);
  return MDF_OK;
}

mdf_status mdf_config_set_lr(mdf_run_config *cfg, double lr) {
  MDF_REQUIRE(cfg != nullptr, "mdf_config_set_lr: null config");
  MDF_REQUIRE(lr > 0.0, "lr must be positive");
  mdf::RunOverrides ov;
  ov.lr = lr;
  mdf::apply_overrides(cfg->cfg, ov);
  return MDF_OK;
}

mdf_status mdf_config_set_out_dir(mdf_run_config *cfg, const char *dir) {
  MDF_REQUIRE(cfg != nullptr && dir != nullptr, "mdf_config_set_out_dir: null argument");
  cfg->cfg.out_dir = dir;
  return MDF_OK;
}

mdf_status mdf_config_set_from(mdf_run_config *cfg, const char *checkpoint) {
  MDF_REQUIRE(cfg != nullptr && checkpoint != nullptr, "mdf_config_set_from: null argument");
  cfg->cfg.from = checkpoint;
  return MDF_OK;
}

mdf_status mdf_config_set_ttsa(mdf_run_config *cfg, const char *ttsa) {
  MDF_REQUIRE(cfg != nullptr && ttsa != nullptr, "mdf_config_set_ttsa: null argument");
  return guarded([&] { cfg->cfg.ttsa = mdf::parse_ttsa(ttsa); });
}

mdf_status mdf_run(const mdf_run_config *cfg, const char *mode, char **summary_json) {
  MDF_REQUIRE(cfg != nullptr && mode != nullptr, "mdf_run: null argument");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    const std::string s = mdf::execute_run(cfg->cfg, mdf::run_mode_from_name(mode));
    if (summary_json) *summary_json = copy_string(s);
  });
}

mdf_status mdf_inspect_checkpoint(const char *path, char **summary_json) {
  MDF_REQUIRE(path != nullptr && summary_json != nullptr, "mdf_inspect_checkpoint: null argument");
  *summary_json = nullptr;
  return guarded([&] { *summary_json = copy_string(mdf::inspect_checkpoint(path)); });
}

mdf_status mdf_model_load(const char *path, mdf_model **out) {
  MDF_REQUIRE(path != nullptr && out != nullptr, "mdf_model_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new mdf_model{mdf::load_checkpoint(path)}; });
}

void mdf_model_free(mdf_model *model) { delete model; }

mdf_status mdf_model_parameter_count(const mdf_model *model, size_t *out) {
  MDF_REQUIRE(model != nullptr && out != nullptr, "mdf_model_parameter_count: null argument");
  std::size_t n = 0;
  for (const auto &p : model->model.parameters()) n += p.tensor.numel();
  *out = n;
  return MDF_OK;
}

mdf_status mdf_model_task_count(const mdf_model *model, size_t *out) {
  MDF_REQUIRE(model != nullptr && out != nullptr, "mdf_model_task_count: null argument");
  *out = model->model.tasks().size();
  return MDF_OK;
}

mdf_status mdf_model_task_name(const mdf_model *model, size_t index, const char **out) {
  MDF_REQUIRE(model != nullptr && out != nullptr, "mdf_model_task_name: null argument");
  MDF_REQUIRE(index < model->model.tasks().size(), "mdf_model_task_name: index out of range");
  *out = model->model.tasks()[index].name.c_str();
  return MDF_OK;
}

mdf_status mdf_model_input_shape(const mdf_model *model, const char *task, size_t *shape, size_t capacity,
                                 size_t *rank) {
  MDF_REQUIRE(model != nullptr && task != nullptr && rank != nullptr, "mdf_model_input_shape: null argument");
  return guarded([&] {
    const auto &s = model->model.task(task).input_shape;
    *rank = s.size();
    if (shape == nullptr || capacity < s.size()) throw mdf::InputError("input shape needs " + std::to_string(s.size()) + " slots");
    for (std::size_t i = 0; i < s.size(); ++i) shape[i] = s[i];
  });
}

mdf_status mdf_model_output_dim(const mdf_model *model, const char *task, size_t *out) {
  MDF_REQUIRE(model != nullptr && task != nullptr && out != nullptr, "mdf_model_output_dim: null argument");
  return guarded([&] { *out = model->model.task(task).out_dim(); });
}

mdf_status mdf_model_forward(const mdf_model *model, const char *task, const double *input, size_t batch,
                             double *logits, size_t logits_len) {
  MDF_REQUIRE(model != nullptr && task != nullptr && input != nullptr && logits != nullptr,
              "mdf_model_forward: null argument");
  MDF_REQUIRE(batch > 0, "mdf_model_forward: empty batch");
  return guarded([&] {
    const mdf::TaskDef &tdef = model->model.task(task);
    if (logits_len != batch * tdef.out_dim()) {
      throw mdf::InputError("logits buffer holds " + std::to_string(logits_len) + " values, need " +
                            std::to_string(batch * tdef.out_dim()));
    }
    mdf::Shape shape = tdef.input_shape;
    shape.insert(shape.begin(), batch);
    const std::size_t n = mdf::shape_numel(shape);
    mdf::Tensor x = mdf::Tensor::from(shape, std::vector<double>(input, input + n), model->model.config().dtype);
    mdf::NoGradScope no_grad;
    const mdf::Tensor y = model->model.forward(x, tdef);
    std::copy(y.data().begin(), y.data().end(), logits);
  });
}

mdf_status mdf_model_digest(const mdf_model *model, char out[17]) {
  MDF_REQUIRE(model != nullptr && out != nullptr, "mdf_model_digest: null argument");
  const std::string d = mdf::parameter_digest(model->model);
  std::memcpy(out, d.c_str(), 17);
  return MDF_OK;
}

}  // extern "C"

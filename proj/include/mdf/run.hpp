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
#ifndef MDF_RUN_HPP_
#define MDF_RUN_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdf/data.hpp"
#include "mdf/latents.hpp"
#include "mdf/medformer.hpp"
#include "mdf/trainer.hpp"

namespace mdf {

enum class RunMode { train, multitask, ssl_pretrain, finetune, eval };

/// "train", "multitask", "ssl-pretrain", "finetune", "eval".
RunMode run_mode_from_name(const std::string &name);
const char *run_mode_name(RunMode mode);

/// One task of a run and where its samples come from.
struct TaskSource {
  TaskDef tdef;
  /// MedMNIST-style zip; empty means synthetic data.
  std::string archive;
  std::size_t samples_per_class = 32;
  std::size_t val_samples_per_class = 8;
  double noise = 0.05;
  std::optional<std::uint64_t> data_seed;
  /// Keep only the first n training rows; 0 keeps all.
  std::size_t max_train = 0;
};

struct RunConfig {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  ModelConfig model;
  LatentsConfig latents;
  std::vector<TaskSource> tasks;
  TrainConfig train;
  /// Cascading sum augmentation starting group size; 1 = plain training.
  std::size_t csa_k0 = 1;
  SslTrainConfig ssl;
  /// Checkpoint to fine-tune from or to evaluate.
  std::string from;
  TtsaOptions ttsa;
  std::string eval_split = "test";

  /// ConfigError when a field required by `mode` is missing.
  void validate(RunMode mode) const;
};

/// Relative paths in the file resolve against `base_dir`.
RunConfig parse_run_config(const std::string &text, const std::string &base_dir = ".");
RunConfig load_run_config(const std::string &path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<double> lr;
  std::optional<std::string> out_dir;
  std::optional<std::string> from;
  std::optional<TtsaOptions> ttsa;
};
void apply_overrides(RunConfig &cfg, const RunOverrides &ov);

/// "K=2,reps=4" (keys case-insensitive, either order). ConfigError otherwise.
TtsaOptions parse_ttsa(const std::string &text);

/// Train/val/test splits for every task of the run.
std::vector<DatasetSplits> load_run_data(const RunConfig &cfg);

/// Executes the run and returns a JSON summary, also written to
/// out_dir/summary.json when out_dir is set.
std::string execute_run(const RunConfig &cfg, RunMode mode);

/// JSON: version, config digest, model config, parameter count, latent
/// names per category, tasks.
std::string inspect_checkpoint(const std::string &path);

/// 16 hex digits over the canonical model config text.
std::string config_digest(const ModelConfig &cfg);

}  // namespace mdf

#endif  // MDF_RUN_HPP_

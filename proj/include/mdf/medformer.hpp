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
#ifndef MDF_MEDFORMER_HPP_
#define MDF_MEDFORMER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdf/attention.hpp"
#include "mdf/latents.hpp"
#include "mdf/nn.hpp"
#include "mdf/task.hpp"
#include "mdf/tokenizer.hpp"
#include "mdf/yaml.hpp"

namespace mdf {

struct ModelConfig {
  std::size_t hidden_dim = 128;
  std::size_t main_layers = 4;
  std::size_t adapt_in_layers = 2;
  std::size_t adapt_out_layers = 2;
  std::size_t num_heads = 4;
  double mlp_ratio = 2.0;
  std::size_t patch_size = 4;
  std::size_t latent_tokens = 32;
  std::size_t latent_dim = 64;
  std::vector<std::size_t> expander_widths = {1024, 1024, 1024};
  double dropout = 0.0;
  DType dtype = DType::f32;

  /// hidden 128, 4 main layers, 4 heads, MLP ratio 2, patch 4, 32 latent
  /// tokens of width 64, expander 1024-1024-1024.
  static ModelConfig small();
  /// hidden 512, 6 main layers, 8 heads, MLP ratio 4, patch 16, 512 latent
  /// tokens of width 256, expander 8192-8192-8192.
  static ModelConfig large();

  BlockConfig block() const { return {hidden_dim, num_heads, mlp_ratio, dropout}; }
  /// Throws ConfigError.
  void validate() const;
  bool operator==(const ModelConfig &) const = default;
};

yaml::Node model_config_to_node(const ModelConfig &cfg);
/// Missing keys keep the defaults of `base`.
ModelConfig model_config_from_node(const yaml::Node &node, const ModelConfig &base = ModelConfig::small());

/// Dense training targets for a batch: one-hot [B,k] (single label),
/// [B,1] in {0,1} (binary), multi-hot [B,k], or [B,1] = label/(k-1)
/// (ordinal). `labels` holds B * label_width() integers.
Tensor make_targets(const std::vector<int> &labels, const TaskDef &tdef, DType dt = DType::f64);

/// Mean loss over the batch for the task type; targets as from make_targets
/// (soft targets from sum augmentation are accepted).
Tensor task_loss(const Tensor &logits, const Tensor &targets, TaskType type);

/// Class decisions per sample: argmax, z > 0, or round(sigmoid(z)*(k-1)).
/// Multi-label yields B*k bits.
std::vector<int> decode(const Tensor &logits, const TaskDef &tdef);

/// Per-class scores for AUC, [B, k] row-major: softmax probabilities,
/// sigmoid per class, sigmoid for binary (k = 1 column), and for ordinal
/// -(sigmoid(z)*(k-1) - c)^2 for each class c.
std::vector<double> class_scores(const Tensor &logits, const TaskDef &tdef);

class Medformer {
 public:
  Medformer() = default;
  Medformer(const ModelConfig &cfg, const LatentsConfig &latents, const std::vector<TaskDef> &tasks,
            std::uint64_t seed);

  const ModelConfig &config() const { return cfg_; }
  const LatentBank &bank() const { return bank_; }
  LatentBank &bank() { return bank_; }
  const std::vector<TaskDef> &tasks() const { return tasks_; }
  const TaskDef &task(const std::string &name) const;
  std::uint64_t seed() const { return seed_; }

  /// Registers a task, creating its head and token embedding if missing.
  void add_task(const TaskDef &tdef);
  /// Creates the SSL expander on top of the pooled trunk output.
  void ensure_expander();
  bool has_expander() const { return !expander_.empty(); }

  /// Patchify, embed, position, Input Adaptformer: [B, ...] -> [B, n, d].
  /// `rng` enables dropout.
  Tensor input_adaptformer(const Tensor &x, const TaskDef &tdef, Rng *rng = nullptr) const;
  Tensor main_body(const Tensor &tokens, Rng *rng = nullptr) const;
  /// Both of the above.
  Tensor trunk(const Tensor &x, const TaskDef &tdef, Rng *rng = nullptr) const;
  /// Output blocks on the projected task latent, mean pooling, task head.
  Tensor output_adaptformer(const Tensor &h, const TaskDef &tdef, Rng *rng = nullptr) const;
  Tensor forward(const Tensor &x, const TaskDef &tdef, Rng *rng = nullptr) const;
  /// Mean-pooled trunk output through the expander: [B, expander width].
  Tensor embed_ssl(const Tensor &x, const TaskDef &tdef, Rng *rng = nullptr) const;

  /// Every trainable tensor with a stable name, in a fixed order.
  ParamList parameters() const;
  /// Ordered layer partition used by backforward propagation: input
  /// embedding with input latents and projections, each input block, each
  /// main block, first output block with task latents and projection, the
  /// remaining output blocks, then heads and expander.
  std::vector<ParamList> layer_groups() const;

  /// Name prefixes of per-task heads and task latents, for routing audits.
  static bool is_head_param(const std::string &name);

  /// Embedding key of an input kind, e.g. "2d.c1".
  static std::string embed_key(const TaskDef &tdef);

 private:
  Tensor project_latent(const Tensor &latent, std::size_t position) const;
  const Linear &head_for(const TaskDef &tdef) const;

  ModelConfig cfg_;
  std::uint64_t seed_ = 0;
  LatentBank bank_;
  std::vector<TaskDef> tasks_;
  std::map<std::string, Linear> embeds_;
  std::vector<Linear> latent_proj_;  // dimension, modality, body part, task; empty when l == d
  std::vector<BlockParams> in_blocks_;
  std::vector<BlockParams> main_blocks_;
  std::vector<BlockParams> out_blocks_;
  std::map<std::string, Linear> heads_;
  Mlp expander_;
};

}  // namespace mdf

#endif  // MDF_MEDFORMER_HPP_

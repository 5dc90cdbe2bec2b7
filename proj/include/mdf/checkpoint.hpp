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
#ifndef MDF_CHECKPOINT_HPP_
#define MDF_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mdf/medformer.hpp"
#include "mdf/optim.hpp"

namespace mdf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointParam {
  std::string name;
  Shape shape;
  DType dtype = DType::f32;
  std::uint64_t offset = 0;  // into the payload
  std::uint64_t nbytes = 0;
};

struct CheckpointInfo {
  std::uint32_t version = 0;
  ModelConfig config;
  LatentsConfig latents;
  std::vector<TaskDef> tasks;
  std::uint64_t seed = 0;
  bool has_expander = false;
  bool has_optimizer = false;
  std::vector<CheckpointParam> params;
  std::string meta;  // caller-supplied JSON object text
  std::uint64_t payload_bytes = 0;

  std::size_t parameter_count() const;
};

/// Layout: "MDFRCKPT", u32 version, u64 header length, JSON header, then
/// the little-endian payload (f32 or f64 per parameter, then optional AdamW
/// moments as f64).
std::string serialize_checkpoint(const Medformer &model, const AdamW *opt = nullptr, const std::string &meta = "{}");
void save_checkpoint(const std::string &path, const Medformer &model, const AdamW *opt = nullptr,
                     const std::string &meta = "{}");

/// Header only. Throws LoadError.
CheckpointInfo parse_checkpoint_info(const std::string &bytes);
CheckpointInfo read_checkpoint_info(const std::string &path);

/// Rebuilds the saved model exactly. When `opt` is given and the file holds
/// optimizer state, it is restored too. Throws LoadError; nothing is
/// returned on failure.
Medformer deserialize_checkpoint(const std::string &bytes, AdamW *opt = nullptr);
Medformer load_checkpoint(const std::string &path, AdamW *opt = nullptr);

/// Trunk parameters: everything except task heads and the SSL expander.
bool is_trunk_param(const std::string &name);

/// Fine-tune load: copies every trunk parameter and latent of the file into
/// `target`, leaving heads and expander untouched. Input embeddings and task
/// latents the target lacks are skipped; any other unknown name, a shape
/// mismatch or a different model config is a LoadError, detected before any
/// tensor is written. Returns the number of tensors copied.
std::size_t load_trunk_into(Medformer &target, const std::string &path);

/// 16 hex digits of FNV-1a over every parameter name, shape and value bits.
std::string parameter_digest(const Medformer &model);
std::string parameter_digest(const ParamList &params);

/// In-memory copy of parameter values, restorable into the same model.
using ParamSnapshot = std::vector<std::vector<double>>;
ParamSnapshot snapshot(const ParamList &params);
void restore(const ParamList &params, const ParamSnapshot &snap);

}  // namespace mdf

#endif  // MDF_CHECKPOINT_HPP_

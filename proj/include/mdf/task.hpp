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
#ifndef MDF_TASK_HPP_
#define MDF_TASK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mdf/tensor.hpp"

namespace mdf {

enum class TaskType : std::uint8_t { single_label, binary, multi_label, ordinal };

const char *task_type_name(TaskType t);
/// Accepts "single_label", "binary", "multi_label", "ordinal" (and the
/// hyphenated / concatenated spellings "single-label", "singlelabel", ...).
TaskType task_type_from_name(const std::string &name);

struct TaskDef {
  std::size_t task_id = 0;
  std::string name;
  std::size_t dims = 2;  // 2 or 3 spatial axes
  std::string modality;
  std::string body_part;
  TaskType type = TaskType::single_label;
  std::size_t num_classes = 2;
  Shape input_shape;  // (C,H,W) or (C,D,H,W)
  std::string dim_latent;
  std::string modality_latent;
  std::string body_latent;
  std::string task_latent;
  std::string head_id;

  /// Logit count: k for single/multi-label, 1 for binary and ordinal.
  std::size_t out_dim() const;
  /// Entries per label row: k for multi-label, 1 otherwise.
  std::size_t label_width() const;
  std::size_t channels() const { return input_shape.empty() ? 0 : input_shape[0]; }
  /// Throws ConfigError on an inconsistent definition.
  void validate() const;
};

}  // namespace mdf

#endif  // MDF_TASK_HPP_

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
#include "mdf/task.hpp"

#include <cctype>

#include "mdf/error.hpp"

namespace mdf {

const char *task_type_name(TaskType t) {
  switch (t) {
    case TaskType::single_label:
      return "single_label";
    case TaskType::binary:
      return "binary";
    case TaskType::multi_label:
      return "multi_label";
    case TaskType::ordinal:
      return "ordinal";
  }
  return "?";
}

TaskType task_type_from_name(const std::string &name) {
  std::string n;
  for (char c : name) {
    if (c != '_' && c != '-' && c != ' ') n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (n == "singlelabel" || n == "multiclass") return TaskType::single_label;
  if (n == "binary") return TaskType::binary;
  if (n == "multilabel") return TaskType::multi_label;
  if (n == "ordinal") return TaskType::ordinal;
  throw ConfigError("unknown task type '" + name + "'");
}

std::size_t TaskDef::out_dim() const {
  return type == TaskType::single_label || type == TaskType::multi_label ? num_classes : 1;
}

std::size_t TaskDef::label_width() const { return type == TaskType::multi_label ? num_classes : 1; }

void TaskDef::validate() const {
  const std::string who = "task '" + name + "': ";
  if (name.empty()) throw ConfigError("task without a name");
  if (dims != 2 && dims != 3) throw ConfigError(who + "dims must be 2 or 3");
  if (input_shape.size() != dims + 1) {
    throw ConfigError(who + "input_shape " + shape_str(input_shape) + " does not have " + std::to_string(dims + 1) +
                      " axes");
  }
  for (std::size_t e : input_shape) {
    if (e == 0) throw ConfigError(who + "empty extent in input_shape");
  }
  if (type == TaskType::binary) {
    if (num_classes != 2) throw ConfigError(who + "binary tasks have 2 classes");
  } else if (num_classes < 2) {
    throw ConfigError(who + "num_classes must be >= 2");
  }
  if (dim_latent.empty() || modality_latent.empty() || body_latent.empty() || task_latent.empty()) {
    throw ConfigError(who + "every latent selection must be named");
  }
  if (head_id.empty()) throw ConfigError(who + "head_id missing");
}

}  // namespace mdf

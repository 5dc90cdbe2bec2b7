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
#ifndef MDF_LATENTS_HPP_
#define MDF_LATENTS_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdf/nn.hpp"
#include "mdf/tensor.hpp"
#include "mdf/yaml.hpp"

namespace mdf {

enum class LatentCategory : std::uint8_t { dimension = 0, modality = 1, body_part = 2, task = 3 };
inline constexpr std::size_t kLatentCategories = 4;

/// "dimension", "modality", "body_part", "task".
const char *category_name(LatentCategory c);
/// Config key for a category, e.g. "dimension_latents".
const char *category_key(LatentCategory c);

struct LatentsConfig {
  std::array<std::vector<std::string>, kLatentCategories> names;

  const std::vector<std::string> &operator[](LatentCategory c) const { return names[static_cast<std::size_t>(c)]; }
  std::vector<std::string> &operator[](LatentCategory c) { return names[static_cast<std::size_t>(c)]; }
  bool contains(LatentCategory c, const std::string &name) const;
  bool operator==(const LatentsConfig &) const = default;
};

/// Accepts either a document with a top-level `latents_config:` mapping or
/// the four category keys at top level. Every category must be present.
LatentsConfig parse_latents_config(const std::string &text);
/// Builds from an already parsed node holding the four category keys.
LatentsConfig latents_config_from_node(const yaml::Node &node);
/// Canonical text form (wrapped in `latents_config:`).
std::string serialize_latents_config(const LatentsConfig &cfg);
yaml::Node latents_config_to_node(const LatentsConfig &cfg);

class LatentBank {
 public:
  LatentBank() = default;
  /// Every latent is drawn i.i.d. N(0, 0.02^2), in config order, from `seed`.
  static LatentBank init(const LatentsConfig &cfg, std::size_t tokens, std::size_t dim, std::uint64_t seed,
                         DType dt = DType::f64);

  const LatentsConfig &config() const { return cfg_; }
  std::size_t tokens() const { return tokens_; }
  std::size_t dim() const { return dim_; }

  /// Throws LookupError listing the known names of that category.
  const Tensor &get(LatentCategory c, const std::string &name) const;
  Tensor &get(LatentCategory c, const std::string &name);

  /// Concat(dimension, modality, body part) -> [3t, l].
  Tensor select_input(const std::string &dim, const std::string &modality, const std::string &body) const;
  /// [t, l]
  Tensor select_task(const std::string &task) const;

  /// Names "latent.<category>.<name>" in config order.
  void collect(ParamList &out) const;
  static std::string param_name(LatentCategory c, const std::string &name);

 private:
  LatentsConfig cfg_;
  std::size_t tokens_ = 0;
  std::size_t dim_ = 0;
  std::array<std::vector<Tensor>, kLatentCategories> tensors_;
};

}  // namespace mdf

#endif  // MDF_LATENTS_HPP_

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
#include "mdf/latents.hpp"

#include <algorithm>
#include <set>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"
#include "mdf/random.hpp"

namespace mdf {

namespace {

constexpr std::array<LatentCategory, kLatentCategories> kAll = {LatentCategory::dimension, LatentCategory::modality,
                                                                 LatentCategory::body_part, LatentCategory::task};

}  // namespace

const char *category_name(LatentCategory c) {
  switch (c) {
    case LatentCategory::dimension:
      return "dimension";
    case LatentCategory::modality:
      return "modality";
    case LatentCategory::body_part:
      return "body_part";
    case LatentCategory::task:
      return "task";
  }
  return "?";
}

const char *category_key(LatentCategory c) {
  switch (c) {
    case LatentCategory::dimension:
      return "dimension_latents";
    case LatentCategory::modality:
      return "modality_latents";
    case LatentCategory::body_part:
      return "body_part_latents";
    case LatentCategory::task:
      return "task_latents";
  }
  return "?";
}

bool LatentsConfig::contains(LatentCategory c, const std::string &name) const {
  const auto &v = (*this)[c];
  return std::find(v.begin(), v.end(), name) != v.end();
}

LatentsConfig latents_config_from_node(const yaml::Node &node) {
  if (!node.is_mapping()) throw ParseError("latents config must be a mapping", node.line());
  for (const auto &[key, value] : node.entries()) {
    bool known = false;
    for (auto c : kAll) known = known || key == category_key(c);
    if (!known) throw ParseError("unknown latents key '" + key + "'", value.line() ? value.line() : node.line());
  }
  LatentsConfig cfg;
  for (auto c : kAll) {
    const yaml::Node *list = node.find(category_key(c));
    if (list == nullptr) throw ParseError(std::string("missing category '") + category_key(c) + "'", node.line());
    if (list->is_null()) continue;
    if (!list->is_sequence()) {
      throw ParseError(std::string(category_key(c)) + " must be a sequence of '- name: X'", list->line());
    }
    std::set<std::string> seen;
    for (const auto &item : list->items()) {
      const yaml::Node *name = item.is_mapping() ? item.find("name") : nullptr;
      if (name == nullptr || !name->is_scalar() || item.entries().size() != 1) {
        throw ParseError("latent entries must be '- name: X'", item.line());
      }
      if (!seen.insert(name->scalar()).second) {
        throw ParseError("duplicate latent name '" + name->scalar() + "' in " + category_key(c), name->line());
      }
      cfg[c].push_back(name->scalar());
    }
  }
  return cfg;
}

LatentsConfig parse_latents_config(const std::string &text) {
  yaml::Node doc = yaml::parse(text);
  if (!doc.is_mapping()) throw ParseError("latents config must be a mapping", doc.line());
  if (const yaml::Node *wrapped = doc.find("latents_config")) {
    if (doc.entries().size() != 1) {
      for (const auto &[key, value] : doc.entries()) {
        if (key != "latents_config") throw ParseError("unknown top-level key '" + key + "'", value.line());
      }
    }
    return latents_config_from_node(*wrapped);
  }
  return latents_config_from_node(doc);
}

yaml::Node latents_config_to_node(const LatentsConfig &cfg) {
  yaml::Node body = yaml::Node::make_mapping();
  for (auto c : kAll) {
    yaml::Node seq = yaml::Node::make_sequence();
    for (const auto &n : cfg[c]) {
      yaml::Node item = yaml::Node::make_mapping();
      item.set("name", yaml::Node::make_scalar(n));
      seq.push(std::move(item));
    }
    body.set(category_key(c), std::move(seq));
  }
  return body;
}

std::string serialize_latents_config(const LatentsConfig &cfg) {
  yaml::Node doc = yaml::Node::make_mapping();
  doc.set("latents_config", latents_config_to_node(cfg));
  return yaml::emit(doc);
}

LatentBank LatentBank::init(const LatentsConfig &cfg, std::size_t tokens, std::size_t dim, std::uint64_t seed,
                            DType dt) {
  if (tokens == 0 || dim == 0) throw ParameterError("latent tokens and dim must be >= 1");
  LatentBank bank;
  bank.cfg_ = cfg;
  bank.tokens_ = tokens;
  bank.dim_ = dim;
  Rng rng(seed);
  for (auto c : kAll) {
    for (std::size_t i = 0; i < cfg[c].size(); ++i) {
      bank.tensors_[static_cast<std::size_t>(c)].push_back(make_param(randn({tokens, dim}, rng, 0.02, dt)));
    }
  }
  return bank;
}

const Tensor &LatentBank::get(LatentCategory c, const std::string &name) const {
  const auto &names = cfg_[c];
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    std::string known;
    for (const auto &n : names) known += (known.empty() ? "" : ", ") + n;
    throw LookupError("unknown " + std::string(category_name(c)) + " latent '" + name + "' (known: " + known + ")");
  }
  return tensors_[static_cast<std::size_t>(c)][static_cast<std::size_t>(it - names.begin())];
}

Tensor &LatentBank::get(LatentCategory c, const std::string &name) {
  return const_cast<Tensor &>(static_cast<const LatentBank *>(this)->get(c, name));
}

Tensor LatentBank::select_input(const std::string &dim, const std::string &modality, const std::string &body) const {
  return ops::concat({get(LatentCategory::dimension, dim), get(LatentCategory::modality, modality),
                      get(LatentCategory::body_part, body)},
                     0);
}

Tensor LatentBank::select_task(const std::string &task) const { return get(LatentCategory::task, task); }

std::string LatentBank::param_name(LatentCategory c, const std::string &name) {
  return std::string("latent.") + category_name(c) + "." + name;
}

void LatentBank::collect(ParamList &out) const {
  for (auto c : kAll) {
    const auto &names = cfg_[c];
    for (std::size_t i = 0; i < names.size(); ++i) {
      out.push_back({param_name(c, names[i]), tensors_[static_cast<std::size_t>(c)][i]});
    }
  }
}

}  // namespace mdf

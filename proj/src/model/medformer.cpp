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
#include "mdf/medformer.hpp"

#include <algorithm>
#include <cmath>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

ModelConfig ModelConfig::small() { return ModelConfig{}; }

ModelConfig ModelConfig::large() {
  ModelConfig c;
  c.hidden_dim = 512;
  c.main_layers = 6;
  c.num_heads = 8;
  c.mlp_ratio = 4.0;
  c.patch_size = 16;
  c.latent_tokens = 512;
  c.latent_dim = 256;
  c.expander_widths = {8192, 8192, 8192};
  return c;
}

void ModelConfig::validate() const {
  block().validate();
  if (main_layers == 0 || adapt_in_layers == 0 || adapt_out_layers == 0) {
    throw ConfigError("model depths must all be >= 1");
  }
  if (patch_size == 0) throw ConfigError("patch_size must be >= 1");
  if (latent_tokens == 0 || latent_dim == 0) throw ConfigError("latent_tokens and latent_dim must be >= 1");
  if (hidden_dim % 2 != 0) throw ConfigError("hidden_dim must be even for the positional code");
  for (std::size_t w : expander_widths) {
    if (w == 0) throw ConfigError("expander widths must be positive");
  }
}

yaml::Node model_config_to_node(const ModelConfig &cfg) {
  auto num = [](auto v) { return yaml::Node::make_scalar(std::to_string(v)); };
  auto real = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return yaml::Node::make_scalar(buf);
  };
  yaml::Node n = yaml::Node::make_mapping();
  n.set("hidden_dim", num(cfg.hidden_dim));
  n.set("main_layers", num(cfg.main_layers));
  n.set("adapt_in_layers", num(cfg.adapt_in_layers));
  n.set("adapt_out_layers", num(cfg.adapt_out_layers));
  n.set("num_heads", num(cfg.num_heads));
  n.set("mlp_ratio", real(cfg.mlp_ratio));
  n.set("patch_size", num(cfg.patch_size));
  n.set("latent_tokens", num(cfg.latent_tokens));
  n.set("latent_dim", num(cfg.latent_dim));
  yaml::Node widths = yaml::Node::make_sequence();
  for (std::size_t w : cfg.expander_widths) widths.push(num(w));
  n.set("expander_widths", widths);
  n.set("dropout", real(cfg.dropout));
  n.set("dtype", yaml::Node::make_scalar(dtype_name(cfg.dtype)));
  return n;
}

ModelConfig model_config_from_node(const yaml::Node &node, const ModelConfig &base) {
  ModelConfig c = base;
  if (node.is_null()) return c;
  auto count = [](const yaml::Node &v) {
    const auto i = v.as_int();
    if (i < 0) throw ConfigError("line " + std::to_string(v.line()) + ": expected a non-negative integer");
    return static_cast<std::size_t>(i);
  };
  for (const auto &[key, v] : node.entries()) {
    if (key == "hidden_dim") {
      c.hidden_dim = count(v);
    } else if (key == "main_layers" || key == "num_layers") {
      c.main_layers = count(v);
    } else if (key == "adapt_in_layers") {
      c.adapt_in_layers = count(v);
    } else if (key == "adapt_out_layers") {
      c.adapt_out_layers = count(v);
    } else if (key == "num_heads") {
      c.num_heads = count(v);
    } else if (key == "mlp_ratio") {
      c.mlp_ratio = v.as_double();
    } else if (key == "patch_size") {
      c.patch_size = count(v);
    } else if (key == "latent_tokens" || key == "num_latent_tokens") {
      c.latent_tokens = count(v);
    } else if (key == "latent_dim") {
      c.latent_dim = count(v);
    } else if (key == "expander_widths") {
      c.expander_widths.clear();
      if (!v.is_null()) {
        for (const auto &w : v.items()) c.expander_widths.push_back(count(w));
      }
    } else if (key == "dropout") {
      c.dropout = v.as_double();
    } else if (key == "dtype") {
      try {
        c.dtype = dtype_from_name(v.as_string());
      } catch (const Error &) {
        throw ConfigError("line " + std::to_string(v.line()) + ": unknown dtype '" + v.as_string() + "'");
      }
    } else {
      throw ConfigError("line " + std::to_string(v.line()) + ": unknown model key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

Tensor make_targets(const std::vector<int> &labels, const TaskDef &tdef, DType dt) {
  const std::size_t w = tdef.label_width();
  if (labels.size() % w != 0) throw LabelError("label count is not a multiple of the label width");
  const std::size_t b = labels.size() / w;
  const std::size_t k = tdef.num_classes;
  auto check = [&](int v, int hi) {
    if (v < 0 || v >= hi) {
      throw LabelError("task '" + tdef.name + "': label " + std::to_string(v) + " outside [0, " + std::to_string(hi) +
                       ")");
    }
  };
  switch (tdef.type) {
    case TaskType::single_label: {
      std::vector<double> t(b * k, 0.0);
      for (std::size_t i = 0; i < b; ++i) {
        check(labels[i], static_cast<int>(k));
        t[i * k + static_cast<std::size_t>(labels[i])] = 1.0;
      }
      return Tensor::from({b, k}, std::move(t), dt);
    }
    case TaskType::binary: {
      std::vector<double> t(b);
      for (std::size_t i = 0; i < b; ++i) {
        check(labels[i], 2);
        t[i] = labels[i];
      }
      return Tensor::from({b, 1}, std::move(t), dt);
    }
    case TaskType::multi_label: {
      std::vector<double> t(b * k);
      for (std::size_t i = 0; i < b * k; ++i) {
        check(labels[i], 2);
        t[i] = labels[i];
      }
      return Tensor::from({b, k}, std::move(t), dt);
    }
    case TaskType::ordinal: {
      std::vector<double> t(b);
      for (std::size_t i = 0; i < b; ++i) {
        check(labels[i], static_cast<int>(k));
        t[i] = static_cast<double>(labels[i]) / static_cast<double>(k - 1);
      }
      return Tensor::from({b, 1}, std::move(t), dt);
    }
  }
  throw ContractError("unknown task type");
}

Tensor task_loss(const Tensor &logits, const Tensor &targets, TaskType type) {
  if (logits.shape() != targets.shape() || logits.rank() != 2) {
    throw DimensionError("task_loss: logits " + shape_str(logits.shape()) + " vs targets " +
                         shape_str(targets.shape()));
  }
  const Tensor t = targets.dtype() == logits.dtype() ? targets : targets.to(logits.dtype());
  switch (type) {
    case TaskType::single_label:
      return ops::neg(ops::mean(ops::sum(ops::mul(ops::log_softmax(logits, -1), t), -1)));
    case TaskType::binary:
    case TaskType::multi_label:
      return ops::mean(ops::bce_with_logits(logits, t));
    case TaskType::ordinal:
      return ops::mean(ops::square(ops::sub(ops::sigmoid(logits), t)));
  }
  throw ContractError("unknown task type");
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

void check_logits(const Tensor &logits, const TaskDef &tdef) {
  if (logits.rank() != 2 || logits.dim(1) != tdef.out_dim()) {
    throw DimensionError("logits " + shape_str(logits.shape()) + " do not match task '" + tdef.name + "' with " +
                         std::to_string(tdef.out_dim()) + " outputs");
  }
}

}  // namespace

std::vector<int> decode(const Tensor &logits, const TaskDef &tdef) {
  check_logits(logits, tdef);
  const std::size_t b = logits.dim(0), o = tdef.out_dim();
  const auto z = logits.data();
  std::vector<int> out;
  for (std::size_t i = 0; i < b; ++i) {
    switch (tdef.type) {
      case TaskType::single_label: {
        const auto row = z.subspan(i * o, o);
        out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
        break;
      }
      case TaskType::binary:
        out.push_back(z[i] > 0.0 ? 1 : 0);
        break;
      case TaskType::multi_label:
        for (std::size_t c = 0; c < o; ++c) out.push_back(z[i * o + c] > 0.0 ? 1 : 0);
        break;
      case TaskType::ordinal:
        out.push_back(static_cast<int>(std::lround(sigmoid(z[i]) * static_cast<double>(tdef.num_classes - 1))));
        break;
    }
  }
  return out;
}

std::vector<double> class_scores(const Tensor &logits, const TaskDef &tdef) {
  check_logits(logits, tdef);
  const std::size_t b = logits.dim(0), o = tdef.out_dim(), k = tdef.num_classes;
  const auto z = logits.data();
  std::vector<double> s;
  for (std::size_t i = 0; i < b; ++i) {
    switch (tdef.type) {
      case TaskType::single_label: {
        const auto row = z.subspan(i * o, o);
        const double top = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - top);
        for (double v : row) s.push_back(std::exp(v - top) / sum);
        break;
      }
      case TaskType::binary:
        s.push_back(sigmoid(z[i]));
        break;
      case TaskType::multi_label:
        for (std::size_t c = 0; c < o; ++c) s.push_back(sigmoid(z[i * o + c]));
        break;
      case TaskType::ordinal: {
        const double pos = sigmoid(z[i]) * static_cast<double>(k - 1);
        for (std::size_t c = 0; c < k; ++c) s.push_back(-(pos - static_cast<double>(c)) * (pos - static_cast<double>(c)));
        break;
      }
    }
  }
  return s;
}

namespace {

enum Stream : std::uint64_t { kBank = 0, kLatentProj = 1, kBlocks = 2, kExpander = 3 };

}  // namespace

Medformer::Medformer(const ModelConfig &cfg, const LatentsConfig &latents, const std::vector<TaskDef> &tasks,
                     std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  const Rng root(seed);
  bank_ = LatentBank::init(latents, cfg_.latent_tokens, cfg_.latent_dim, root.derive(kBank).seed(), cfg_.dtype);
  const DType dt = cfg_.dtype;
  const std::size_t d = cfg_.hidden_dim;
  if (cfg_.latent_dim != d) {
    Rng rng = root.derive(kLatentProj);
    for (std::size_t i = 0; i < kLatentCategories; ++i) latent_proj_.push_back(Linear::init(cfg_.latent_dim, d, rng, dt));
  }
  Rng rng = root.derive(kBlocks);
  const BlockConfig bc = cfg_.block();
  for (std::size_t i = 0; i < cfg_.adapt_in_layers; ++i) in_blocks_.push_back(BlockParams::init(bc, true, rng, dt));
  for (std::size_t i = 0; i < cfg_.main_layers; ++i) main_blocks_.push_back(BlockParams::init(bc, false, rng, dt));
  for (std::size_t i = 0; i < cfg_.adapt_out_layers; ++i) out_blocks_.push_back(BlockParams::init(bc, true, rng, dt));
  for (const auto &t : tasks) add_task(t);
}

void Medformer::add_task(const TaskDef &tdef) {
  tdef.validate();
  for (const auto &t : tasks_) {
    if (t.name == tdef.name) throw ConfigError("duplicate task '" + tdef.name + "'");
  }
  const LatentsConfig &lc = bank_.config();
  auto need = [&](LatentCategory c, const std::string &n) {
    if (!lc.contains(c, n)) {
      throw ConfigError("task '" + tdef.name + "' references unknown " + category_name(c) + " latent '" + n + "'");
    }
  };
  need(LatentCategory::dimension, tdef.dim_latent);
  need(LatentCategory::modality, tdef.modality_latent);
  need(LatentCategory::body_part, tdef.body_latent);
  need(LatentCategory::task, tdef.task_latent);
  const Rng root(seed_);
  const std::string key = embed_key(tdef);
  if (!embeds_.count(key)) {
    PatchGrid g = make_patch_grid(tdef.input_shape, cfg_.patch_size);
    Rng rng = root.derive(fnv1a("embed." + key));
    embeds_.emplace(key, Linear::init(g.token_dim, cfg_.hidden_dim, rng, cfg_.dtype));
  }
  auto head = heads_.find(tdef.head_id);
  if (head == heads_.end()) {
    Rng rng = root.derive(fnv1a("head." + tdef.head_id));
    heads_.emplace(tdef.head_id, Linear::init(cfg_.hidden_dim, tdef.out_dim(), rng, cfg_.dtype));
  } else if (head->second.out_dim() != tdef.out_dim()) {
    throw ConfigError("head '" + tdef.head_id + "' has " + std::to_string(head->second.out_dim()) +
                      " outputs, task '" + tdef.name + "' needs " + std::to_string(tdef.out_dim()));
  }
  tasks_.push_back(tdef);
}

void Medformer::ensure_expander() {
  if (!expander_.empty()) return;
  if (cfg_.expander_widths.empty()) throw ConfigError("expander_widths is empty");
  Rng rng = Rng(seed_).derive(kExpander);
  expander_ = Mlp::init(cfg_.hidden_dim, cfg_.expander_widths, rng, cfg_.dtype);
}

const TaskDef &Medformer::task(const std::string &name) const {
  for (const auto &t : tasks_) {
    if (t.name == name) return t;
  }
  throw LookupError("unknown task '" + name + "'");
}

std::string Medformer::embed_key(const TaskDef &tdef) {
  return std::to_string(tdef.dims) + "d.c" + std::to_string(tdef.channels());
}

Tensor Medformer::project_latent(const Tensor &latent, std::size_t position) const {
  if (latent_proj_.empty()) return latent;
  return latent_proj_[position](latent);
}

Tensor Medformer::input_adaptformer(const Tensor &x, const TaskDef &tdef, Rng *rng) const {
  const Shape &s = x.shape();
  const Shape &want = tdef.input_shape;
  const bool single = s == want;
  const bool batch = s.size() == want.size() + 1 && Shape(s.begin() + 1, s.end()) == want;
  if (!single && !batch) {
    throw InputError("task '" + tdef.name + "' expects samples of shape " + shape_str(want) + ", got " + shape_str(s));
  }
  auto it = embeds_.find(embed_key(tdef));
  if (it == embeds_.end()) throw RoutingError("no token embedding for input kind " + embed_key(tdef));
  const PatchGrid grid = make_patch_grid(want, cfg_.patch_size);
  Tensor xin = x.dtype() == cfg_.dtype ? x : x.to(cfg_.dtype);
  Tensor h = pos_embed(it->second(patchify(xin, grid)), grid);
  Tensor lat = ops::concat({project_latent(bank_.get(LatentCategory::dimension, tdef.dim_latent), 0),
                            project_latent(bank_.get(LatentCategory::modality, tdef.modality_latent), 1),
                            project_latent(bank_.get(LatentCategory::body_part, tdef.body_latent), 2)},
                           0);
  const BlockConfig bc = cfg_.block();
  for (const auto &blk : in_blocks_) h = transformer_block(h, lat, bc, blk, rng);
  return h;
}

Tensor Medformer::main_body(const Tensor &tokens, Rng *rng) const {
  const BlockConfig bc = cfg_.block();
  Tensor h = tokens;
  for (const auto &blk : main_blocks_) h = transformer_block(h, Tensor(), bc, blk, rng);
  return h;
}

Tensor Medformer::trunk(const Tensor &x, const TaskDef &tdef, Rng *rng) const {
  return main_body(input_adaptformer(x, tdef, rng), rng);
}

const Linear &Medformer::head_for(const TaskDef &tdef) const {
  bool registered = false;
  for (const auto &t : tasks_) registered = registered || (t.name == tdef.name && t.head_id == tdef.head_id);
  auto it = heads_.find(tdef.head_id);
  if (!registered || it == heads_.end()) {
    throw RoutingError("head '" + tdef.head_id + "' is not registered for task '" + tdef.name + "'");
  }
  if (it->second.out_dim() != tdef.out_dim()) {
    throw RoutingError("head '" + tdef.head_id + "' output width does not match task '" + tdef.name + "'");
  }
  return it->second;
}

Tensor Medformer::output_adaptformer(const Tensor &h, const TaskDef &tdef, Rng *rng) const {
  const Linear &head = head_for(tdef);
  Tensor lat = project_latent(bank_.get(LatentCategory::task, tdef.task_latent), 3);
  const BlockConfig bc = cfg_.block();
  Tensor o = h;
  for (const auto &blk : out_blocks_) o = transformer_block(o, lat, bc, blk, rng);
  Tensor pooled = ops::mean(o, -2);
  Tensor logits = head(pooled);
  return logits.rank() == 1 ? ops::reshape(logits, {1, logits.dim(0)}) : logits;
}

Tensor Medformer::forward(const Tensor &x, const TaskDef &tdef, Rng *rng) const {
  return output_adaptformer(trunk(x, tdef, rng), tdef, rng);
}

Tensor Medformer::embed_ssl(const Tensor &x, const TaskDef &tdef, Rng *rng) const {
  if (expander_.empty()) throw ContractError("expander not initialized");
  Tensor pooled = ops::mean(trunk(x, tdef, rng), -2);
  if (pooled.rank() == 1) pooled = ops::reshape(pooled, {1, pooled.dim(0)});
  return expander_(pooled);
}

ParamList Medformer::parameters() const {
  ParamList out;
  for (const auto &g : layer_groups()) out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<ParamList> Medformer::layer_groups() const {
  std::vector<ParamList> groups;
  ParamList first;
  for (const auto &[key, lin] : embeds_) lin.collect("embed." + key, first);
  ParamList bank;
  bank_.collect(bank);
  ParamList task_latents;
  for (auto &p : bank) {
    (p.name.rfind("latent.task.", 0) == 0 ? task_latents : first).push_back(p);
  }
  static const char *kProj[] = {"dimension", "modality", "body_part", "task"};
  for (std::size_t i = 0; i + 1 < latent_proj_.size(); ++i) {
    latent_proj_[i].collect(std::string("latent_proj.") + kProj[i], first);
  }
  groups.push_back(std::move(first));
  for (std::size_t i = 0; i < in_blocks_.size(); ++i) {
    ParamList g;
    in_blocks_[i].collect("in." + std::to_string(i), g);
    groups.push_back(std::move(g));
  }
  for (std::size_t i = 0; i < main_blocks_.size(); ++i) {
    ParamList g;
    main_blocks_[i].collect("main." + std::to_string(i), g);
    groups.push_back(std::move(g));
  }
  for (std::size_t i = 0; i < out_blocks_.size(); ++i) {
    ParamList g;
    if (i == 0) {
      g = task_latents;
      if (!latent_proj_.empty()) latent_proj_[3].collect("latent_proj.task", g);
    }
    out_blocks_[i].collect("out." + std::to_string(i), g);
    groups.push_back(std::move(g));
  }
  ParamList last;
  for (const auto &[id, lin] : heads_) lin.collect("head." + id, last);
  expander_.collect("expander", last);
  if (!last.empty()) groups.push_back(std::move(last));
  return groups;
}

bool Medformer::is_head_param(const std::string &name) { return name.rfind("head.", 0) == 0; }

}  // namespace mdf

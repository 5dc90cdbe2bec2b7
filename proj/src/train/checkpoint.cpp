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
#include "mdf/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <json.hpp>

#include "mdf/error.hpp"
#include "mdf/random.hpp"

namespace mdf {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'D', 'F', 'R', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::string &out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T>
T get_le(const char *p) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

json config_json(const ModelConfig &c) {
  return json{{"hidden_dim", c.hidden_dim},         {"main_layers", c.main_layers},
              {"adapt_in_layers", c.adapt_in_layers}, {"adapt_out_layers", c.adapt_out_layers},
              {"num_heads", c.num_heads},           {"mlp_ratio", c.mlp_ratio},
              {"patch_size", c.patch_size},         {"latent_tokens", c.latent_tokens},
              {"latent_dim", c.latent_dim},         {"expander_widths", c.expander_widths},
              {"dropout", c.dropout},               {"dtype", dtype_name(c.dtype)}};
}

DType dtype_from(const std::string &s) {
  if (s == "f32") return DType::f32;
  if (s == "f64") return DType::f64;
  throw LoadError("unknown dtype '" + s + "'");
}

ModelConfig config_from(const json &j) {
  ModelConfig c;
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.main_layers = j.at("main_layers").get<std::size_t>();
  c.adapt_in_layers = j.at("adapt_in_layers").get<std::size_t>();
  c.adapt_out_layers = j.at("adapt_out_layers").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.mlp_ratio = j.at("mlp_ratio").get<double>();
  c.patch_size = j.at("patch_size").get<std::size_t>();
  c.latent_tokens = j.at("latent_tokens").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.expander_widths = j.at("expander_widths").get<std::vector<std::size_t>>();
  c.dropout = j.at("dropout").get<double>();
  c.dtype = dtype_from(j.at("dtype").get<std::string>());
  return c;
}

json task_json(const TaskDef &t) {
  return json{{"task_id", t.task_id},
              {"name", t.name},
              {"dims", t.dims},
              {"modality", t.modality},
              {"body_part", t.body_part},
              {"type", task_type_name(t.type)},
              {"num_classes", t.num_classes},
              {"input_shape", t.input_shape},
              {"dim_latent", t.dim_latent},
              {"modality_latent", t.modality_latent},
              {"body_latent", t.body_latent},
              {"task_latent", t.task_latent},
              {"head_id", t.head_id}};
}

TaskDef task_from(const json &j) {
  TaskDef t;
  t.task_id = j.at("task_id").get<std::size_t>();
  t.name = j.at("name").get<std::string>();
  t.dims = j.at("dims").get<std::size_t>();
  t.modality = j.at("modality").get<std::string>();
  t.body_part = j.at("body_part").get<std::string>();
  t.type = task_type_from_name(j.at("type").get<std::string>());
  t.num_classes = j.at("num_classes").get<std::size_t>();
  t.input_shape = j.at("input_shape").get<Shape>();
  t.dim_latent = j.at("dim_latent").get<std::string>();
  t.modality_latent = j.at("modality_latent").get<std::string>();
  t.body_latent = j.at("body_latent").get<std::string>();
  t.task_latent = j.at("task_latent").get<std::string>();
  t.head_id = j.at("head_id").get<std::string>();
  return t;
}

json latents_json(const LatentsConfig &l) {
  json j;
  for (auto c : {LatentCategory::dimension, LatentCategory::modality, LatentCategory::body_part, LatentCategory::task}) {
    j[category_key(c)] = l[c];
  }
  return j;
}

LatentsConfig latents_from(const json &j) {
  LatentsConfig l;
  for (auto c : {LatentCategory::dimension, LatentCategory::modality, LatentCategory::body_part, LatentCategory::task}) {
    l[c] = j.at(category_key(c)).get<std::vector<std::string>>();
  }
  return l;
}

std::size_t width_of(DType dt) { return dt == DType::f32 ? 4 : 8; }

void append_values(std::string &out, std::span<const double> v, DType dt) {
  for (double x : v) {
    if (dt == DType::f32) put_le<float>(out, static_cast<float>(x));
    else put_le<double>(out, x);
  }
}

struct Parsed {
  CheckpointInfo info;
  json header;
  std::string_view payload;
};

Parsed parse(const std::string &bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw LoadError("not a checkpoint (bad magic)");
  Parsed p;
  p.info.version = get_le<std::uint32_t>(bytes.data() + 8);
  if (p.info.version != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version " + std::to_string(p.info.version));
  }
  const auto hlen = get_le<std::uint64_t>(bytes.data() + 12);
  if (hlen > bytes.size() - 20) throw LoadError("truncated checkpoint header");
  try {
    p.header = json::parse(bytes.begin() + 20, bytes.begin() + 20 + static_cast<std::ptrdiff_t>(hlen));
    auto &h = p.header;
    auto &info = p.info;
    info.config = config_from(h.at("config"));
    info.latents = latents_from(h.at("latents"));
    for (const auto &t : h.at("tasks")) info.tasks.push_back(task_from(t));
    info.seed = h.at("seed").get<std::uint64_t>();
    info.has_expander = h.at("has_expander").get<bool>();
    info.has_optimizer = h.contains("optimizer");
    info.meta = h.at("meta").dump();
    info.payload_bytes = h.at("payload_bytes").get<std::uint64_t>();
    for (const auto &e : h.at("params")) {
      CheckpointParam cp;
      cp.name = e.at("name").get<std::string>();
      cp.shape = e.at("shape").get<Shape>();
      cp.dtype = dtype_from(e.at("dtype").get<std::string>());
      cp.offset = e.at("offset").get<std::uint64_t>();
      cp.nbytes = e.at("nbytes").get<std::uint64_t>();
      std::size_t n = 1;
      for (auto d : cp.shape) n *= d;
      if (cp.nbytes != n * width_of(cp.dtype) || cp.offset + cp.nbytes > info.payload_bytes) {
        throw LoadError("parameter table entry '" + cp.name + "' is inconsistent");
      }
      info.params.push_back(std::move(cp));
    }
  } catch (const json::exception &e) {
    throw LoadError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError &e) {
    throw LoadError(std::string("malformed checkpoint header: ") + e.what());
  }
  const std::size_t body = 20 + hlen;
  if (bytes.size() - body != p.info.payload_bytes) {
    throw LoadError("payload holds " + std::to_string(bytes.size() - body) + " bytes, header declares " +
                    std::to_string(p.info.payload_bytes));
  }
  p.payload = std::string_view(bytes).substr(body);
  return p;
}

std::vector<double> read_values(std::string_view payload, std::uint64_t offset, std::size_t n, DType dt) {
  std::vector<double> out(n);
  const char *base = payload.data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = dt == DType::f32 ? static_cast<double>(get_le<float>(base + 4 * i)) : get_le<double>(base + 8 * i);
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::size_t CheckpointInfo::parameter_count() const {
  std::size_t n = 0;
  for (const auto &p : params) {
    std::size_t e = 1;
    for (auto d : p.shape) e *= d;
    n += e;
  }
  return n;
}

std::string serialize_checkpoint(const Medformer &model, const AdamW *opt, const std::string &meta) {
  const ParamList params = model.parameters();
  json table = json::array();
  std::string payload;
  for (const auto &p : params) {
    const std::uint64_t off = payload.size();
    append_values(payload, p.tensor.data(), p.tensor.dtype());
    table.push_back(json{{"name", p.name},
                         {"shape", p.tensor.shape()},
                         {"dtype", dtype_name(p.tensor.dtype())},
                         {"offset", off},
                         {"nbytes", payload.size() - off}});
  }
  json h;
  h["format"] = "medformer-checkpoint";
  h["config"] = config_json(model.config());
  h["latents"] = latents_json(model.bank().config());
  h["tasks"] = json::array();
  for (const auto &t : model.tasks()) h["tasks"].push_back(task_json(t));
  h["seed"] = model.seed();
  h["has_expander"] = model.has_expander();
  h["params"] = table;
  try {
    h["meta"] = json::parse(meta);
  } catch (const json::exception &) {
    throw ParameterError("checkpoint meta must be a JSON document");
  }
  if (opt) {
    json o;
    o["beta1"] = opt->config().beta1;
    o["beta2"] = opt->config().beta2;
    o["eps"] = opt->config().eps;
    o["weight_decay"] = opt->config().weight_decay;
    json states = json::array();
    for (const auto &[name, st] : opt->state()) {
      const std::uint64_t off = payload.size();
      append_values(payload, st.m, DType::f64);
      append_values(payload, st.v, DType::f64);
      states.push_back(json{{"name", name}, {"steps", st.steps}, {"size", st.m.size()}, {"offset", off}});
    }
    o["state"] = states;
    h["optimizer"] = o;
  }
  h["payload_bytes"] = payload.size();
  const std::string header = h.dump();
  std::string out(kMagic, 8);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header.size());
  out += header;
  out += payload;
  return out;
}

void save_checkpoint(const std::string &path, const Medformer &model, const AdamW *opt, const std::string &meta) {
  const std::string bytes = serialize_checkpoint(model, opt, meta);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot write checkpoint");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(path + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(path + ": cannot move checkpoint into place");
}

CheckpointInfo parse_checkpoint_info(const std::string &bytes) { return parse(bytes).info; }

CheckpointInfo read_checkpoint_info(const std::string &path) { return parse(read_file(path)).info; }

Medformer deserialize_checkpoint(const std::string &bytes, AdamW *opt) {
  Parsed p = parse(bytes);
  Medformer m;
  try {
    m = Medformer(p.info.config, p.info.latents, p.info.tasks, p.info.seed);
    if (p.info.has_expander) m.ensure_expander();
  } catch (const Error &e) {
    throw LoadError(std::string("checkpoint describes an invalid model: ") + e.what());
  }
  std::map<std::string, Tensor> by_name;
  for (const auto &np : m.parameters()) by_name.emplace(np.name, np.tensor);
  if (by_name.size() != p.info.params.size()) {
    throw LoadError("checkpoint holds " + std::to_string(p.info.params.size()) + " tensors, model has " +
                    std::to_string(by_name.size()));
  }
  for (const auto &cp : p.info.params) {
    auto it = by_name.find(cp.name);
    if (it == by_name.end()) throw LoadError("unknown parameter '" + cp.name + "'");
    Tensor t = it->second;
    if (t.shape() != cp.shape || t.dtype() != cp.dtype) throw LoadError("parameter '" + cp.name + "' has a different shape");
    const auto v = read_values(p.payload, cp.offset, t.numel(), cp.dtype);
    std::copy(v.begin(), v.end(), t.mutable_data().begin());
  }
  if (opt && p.info.has_optimizer) {
    try {
      const auto &o = p.header.at("optimizer");
      AdamWConfig c;
      c.beta1 = o.at("beta1").get<double>();
      c.beta2 = o.at("beta2").get<double>();
      c.eps = o.at("eps").get<double>();
      c.weight_decay = o.at("weight_decay").get<double>();
      AdamW restored(c);
      for (const auto &s : o.at("state")) {
        const auto n = s.at("size").get<std::size_t>();
        const auto off = s.at("offset").get<std::uint64_t>();
        if (off + 16 * n > p.payload.size()) throw LoadError("optimizer state exceeds the payload");
        AdamState st;
        st.steps = s.at("steps").get<std::uint64_t>();
        st.m = read_values(p.payload, off, n, DType::f64);
        st.v = read_values(p.payload, off + 8 * n, n, DType::f64);
        restored.state()[s.at("name").get<std::string>()] = std::move(st);
      }
      *opt = std::move(restored);
    } catch (const json::exception &e) {
      throw LoadError(std::string("malformed optimizer state: ") + e.what());
    }
  }
  return m;
}

Medformer load_checkpoint(const std::string &path, AdamW *opt) { return deserialize_checkpoint(read_file(path), opt); }

bool is_trunk_param(const std::string &name) {
  return name.rfind("head.", 0) != 0 && name.rfind("expander.", 0) != 0;
}

std::size_t load_trunk_into(Medformer &target, const std::string &path) {
  const std::string bytes = read_file(path);
  Parsed p = parse(bytes);
  if (!(p.info.config == target.config())) throw LoadError(path + ": model config differs from the target model");
  std::map<std::string, Tensor> by_name;
  for (const auto &np : target.parameters()) by_name.emplace(np.name, np.tensor);
  std::vector<std::pair<Tensor, const CheckpointParam *>> plan;
  for (const auto &cp : p.info.params) {
    if (!is_trunk_param(cp.name)) continue;
    auto it = by_name.find(cp.name);
    if (it == by_name.end()) {
      if (cp.name.rfind("embed.", 0) == 0 || cp.name.rfind("latent.task.", 0) == 0) continue;
      throw LoadError(path + ": unknown parameter '" + cp.name + "' for the target model");
    }
    if (it->second.shape() != cp.shape || it->second.dtype() != cp.dtype) {
      throw LoadError(path + ": parameter '" + cp.name + "' has a different shape");
    }
    plan.emplace_back(it->second, &cp);
  }
  for (auto &[t, cp] : plan) {
    const auto v = read_values(p.payload, cp->offset, t.numel(), cp->dtype);
    std::copy(v.begin(), v.end(), t.mutable_data().begin());
  }
  return plan.size();
}

std::string parameter_digest(const ParamList &params) {
  std::uint64_t h = fnv1a(std::string());
  for (const auto &p : params) {
    h = fnv1a(p.name.data(), p.name.size(), h);
    for (auto d : p.tensor.shape()) {
      const std::uint64_t v = d;
      h = fnv1a(&v, sizeof v, h);
    }
    for (double x : p.tensor.data()) h = fnv1a(&x, sizeof x, h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string parameter_digest(const Medformer &model) { return parameter_digest(model.parameters()); }

ParamSnapshot snapshot(const ParamList &params) {
  ParamSnapshot s;
  s.reserve(params.size());
  for (const auto &p : params) s.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return s;
}

void restore(const ParamList &params, const ParamSnapshot &snap) {
  if (snap.size() != params.size()) throw ContractError("restore: snapshot does not match the parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    if (snap[i].size() != t.numel()) throw ContractError("restore: size mismatch for '" + params[i].name + "'");
    std::copy(snap[i].begin(), snap[i].end(), t.mutable_data().begin());
  }
}

}  // namespace mdf

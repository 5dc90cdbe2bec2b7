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
#include "mdf/run.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "mdf/checkpoint.hpp"
#include "mdf/error.hpp"
#include "mdf/random.hpp"
#include "mdf/yaml.hpp"

namespace mdf {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunMode run_mode_from_name(const std::string &name) {
  if (name == "train") return RunMode::train;
  if (name == "multitask") return RunMode::multitask;
  if (name == "ssl-pretrain" || name == "ssl_pretrain") return RunMode::ssl_pretrain;
  if (name == "finetune") return RunMode::finetune;
  if (name == "eval") return RunMode::eval;
  throw ConfigError("unknown run mode '" + name + "'");
}

const char *run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::train:
      return "train";
    case RunMode::multitask:
      return "multitask";
    case RunMode::ssl_pretrain:
      return "ssl-pretrain";
    case RunMode::finetune:
      return "finetune";
    case RunMode::eval:
      return "eval";
  }
  return "?";
}

// ---- parsing ------------------------------------------------------------

namespace {

std::string at_line(const yaml::Node &n) { return "line " + std::to_string(n.line()) + ": "; }

std::size_t count_of(const yaml::Node &v) {
  const auto i = v.as_int();
  if (i < 0) throw ConfigError(at_line(v) + "expected a non-negative integer");
  return static_cast<std::size_t>(i);
}

std::uint64_t seed_of(const yaml::Node &v) {
  const auto i = v.as_int();
  if (i < 0) throw ConfigError(at_line(v) + "seed must be non-negative");
  return static_cast<std::uint64_t>(i);
}

void require_mapping(const yaml::Node &n, const std::string &what) {
  if (!n.is_mapping()) throw ConfigError(at_line(n) + what + " must be a mapping");
}

std::string resolve(const std::string &path, const std::string &base) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

AugPipeline pipeline_from(const yaml::Node &v) {
  const std::string name = v.as_string();
  if (name == "standard") return AugPipeline::standard();
  if (name == "randaugment") return AugPipeline::randaugment();
  if (name == "identity" || name == "none") return AugPipeline::identity();
  throw ConfigError(at_line(v) + "unknown augmentation pipeline '" + name + "'");
}

ModelConfig parse_model(const yaml::Node &node) {
  if (node.is_null()) return ModelConfig::small();
  require_mapping(node, "model");
  ModelConfig base = ModelConfig::small();
  yaml::Node rest = yaml::Node::make_mapping(node.line());
  for (const auto &[key, v] : node.entries()) {
    if (key == "preset") {
      const std::string p = v.as_string();
      if (p == "small") base = ModelConfig::small();
      else if (p == "large") base = ModelConfig::large();
      else throw ConfigError(at_line(v) + "unknown model preset '" + p + "' (small or large)");
    } else {
      rest.set(key, v);
    }
  }
  return model_config_from_node(rest, base);
}

TaskSource parse_task(const yaml::Node &n, const std::string &base_dir) {
  require_mapping(n, "task entry");
  TaskSource src;
  RegistryRow row;
  std::size_t side = 28;
  std::optional<std::string> task_latent;
  bool custom = true;
  if (const auto *d = n.find("dataset")) {
    row = registry_row(d->as_string());
    custom = false;
  }
  for (const auto &[key, v] : n.entries()) {
    if (key == "dataset") {
    } else if (key == "name") {
      row.dataset = v.as_string();
    } else if (key == "dims") {
      row.dims = count_of(v);
    } else if (key == "type") {
      try {
        row.type = task_type_from_name(v.as_string());
      } catch (const ConfigError &) {
        throw;
      } catch (const Error &e) {
        throw ConfigError(at_line(v) + e.what());
      }
    } else if (key == "num_classes") {
      row.num_classes = count_of(v);
    } else if (key == "channels") {
      row.channels = count_of(v);
    } else if (key == "modality") {
      row.modality = v.as_string();
    } else if (key == "body_part") {
      row.body_part = v.as_string();
    } else if (key == "side") {
      side = count_of(v);
    } else if (key == "task_latent") {
      task_latent = v.as_string();
    } else if (key == "archive") {
      src.archive = resolve(v.as_string(), base_dir);
    } else if (key == "samples_per_class") {
      src.samples_per_class = count_of(v);
    } else if (key == "val_samples_per_class") {
      src.val_samples_per_class = count_of(v);
    } else if (key == "noise") {
      src.noise = v.as_double();
    } else if (key == "data_seed") {
      src.data_seed = seed_of(v);
    } else if (key == "max_train") {
      src.max_train = count_of(v);
    } else {
      throw ConfigError(at_line(v) + "unknown task key '" + key + "'");
    }
  }
  if (custom) {
    for (const char *k : {"name", "dims", "type", "num_classes", "channels", "modality", "body_part"}) {
      if (!n.has(k)) throw ConfigError(at_line(n) + "task without 'dataset' needs '" + k + "'");
    }
  }
  LatentsConfig own;
  own[LatentCategory::dimension] = {row.dims == 2 ? "2d_latent" : "3d_latent"};
  own[LatentCategory::modality] = {row.modality};
  own[LatentCategory::body_part] = {row.body_part};
  own[LatentCategory::task] = {registry_task_latent(row)};
  src.tdef = task_registry(own, {row}, side).front();
  if (task_latent) src.tdef.task_latent = *task_latent;
  src.tdef.validate();
  return src;
}

void parse_train(const yaml::Node &node, TrainConfig &t, std::size_t &csa_k0) {
  require_mapping(node, "train");
  for (const auto &[key, v] : node.entries()) {
    if (key == "mode") {
      try {
        t.mode = train_mode_from_name(v.as_string());
      } catch (const ConfigError &e) {
        throw ConfigError(at_line(v) + e.what());
      }
    } else if (key == "reverse_layers") {
      t.reverse_layers = v.as_bool();
    } else if (key == "steps") {
      t.steps = count_of(v);
    } else if (key == "batch_size") {
      t.batch_size = count_of(v);
    } else if (key == "batch_size_3d") {
      t.batch_size_3d = count_of(v);
    } else if (key == "lr") {
      t.lr = v.as_double();
    } else if (key == "weight_decay") {
      t.weight_decay = v.as_double();
    } else if (key == "warmup_frac") {
      t.warmup_frac = v.as_double();
    } else if (key == "div_factor") {
      t.div_factor = v.as_double();
    } else if (key == "final_div_factor") {
      t.final_div_factor = v.as_double();
    } else if (key == "clip_norm") {
      t.clip_norm = v.as_double();
    } else if (key == "sum_k") {
      t.sum_k = count_of(v);
    } else if (key == "csa_k0") {
      csa_k0 = count_of(v);
    } else if (key == "augment") {
      t.augment = v.as_bool();
    } else if (key == "pipeline") {
      t.pipeline = pipeline_from(v);
    } else if (key == "dropout") {
      t.dropout = v.as_bool();
    } else if (key == "eval_every") {
      t.eval_every = count_of(v);
    } else if (key == "eval_batch") {
      t.eval_batch = count_of(v);
    } else if (key == "audit_every") {
      t.audit_every = count_of(v);
    } else if (key == "best_by") {
      const std::string b = v.as_string();
      if (b == "auc") t.best_by = BestBy::auc;
      else if (b == "loss") t.best_by = BestBy::loss;
      else throw ConfigError(at_line(v) + "best_by must be auc or loss");
    } else if (key == "stop_at_accuracy") {
      t.stop_at_accuracy = v.as_double();
    } else if (key == "eval_on_train") {
      t.eval_on_train = v.as_bool();
    } else {
      throw ConfigError(at_line(v) + "unknown train key '" + key + "'");
    }
  }
}

void parse_ssl(const yaml::Node &node, SslTrainConfig &s) {
  require_mapping(node, "ssl");
  for (const auto &[key, v] : node.entries()) {
    if (key == "objective") {
      try {
        s.ssl.objective = ssl_objective_from_name(v.as_string());
      } catch (const ConfigError &e) {
        throw ConfigError(at_line(v) + e.what());
      }
    } else if (key == "steps") {
      s.steps = count_of(v);
    } else if (key == "batch_size") {
      s.batch_size = count_of(v);
    } else if (key == "lr") {
      s.lr = v.as_double();
    } else if (key == "weight_decay") {
      s.weight_decay = v.as_double();
    } else if (key == "warmup_frac") {
      s.warmup_frac = v.as_double();
    } else if (key == "clip_norm") {
      s.clip_norm = v.as_double();
    } else if (key == "eval_every") {
      s.eval_every = count_of(v);
    } else if (key == "pipeline") {
      s.ssl.pipeline = pipeline_from(v);
    } else if (key == "barlow_lambda") {
      s.ssl.barlow_lambda = v.as_double();
    } else if (key == "vicreg") {
      require_mapping(v, "ssl.vicreg");
      for (const auto &[wk, wv] : v.entries()) {
        auto &w = s.ssl.vicreg;
        if (wk == "inv_mse") w.inv_mse = wv.as_double();
        else if (wk == "inv_cos") w.inv_cos = wv.as_double();
        else if (wk == "var_coeff") w.var_coeff = wv.as_double();
        else if (wk == "cov_coeff") w.cov_coeff = wv.as_double();
        else if (wk == "gamma") w.gamma = wv.as_double();
        else if (wk == "var_eps") w.var_eps = wv.as_double();
        else throw ConfigError(at_line(wv) + "unknown vicreg key '" + wk + "'");
      }
    } else {
      throw ConfigError(at_line(v) + "unknown ssl key '" + key + "'");
    }
  }
}

void merge_latents(LatentsConfig &into, const LatentsConfig &from) {
  for (std::size_t c = 0; c < kLatentCategories; ++c) {
    for (const auto &name : from.names[c]) {
      auto &v = into.names[c];
      if (std::find(v.begin(), v.end(), name) == v.end()) v.push_back(name);
    }
  }
}

LatentsConfig latents_of(const TaskDef &t) {
  LatentsConfig c;
  c[LatentCategory::dimension] = {t.dim_latent};
  c[LatentCategory::modality] = {t.modality_latent};
  c[LatentCategory::body_part] = {t.body_latent};
  c[LatentCategory::task] = {t.task_latent};
  return c;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig parse_run_config(const std::string &text, const std::string &base_dir) {
  const yaml::Node root = yaml::parse(text);
  if (root.is_null()) throw ConfigError("empty run config");
  require_mapping(root, "run config");
  RunConfig cfg;
  std::optional<LatentsConfig> declared;
  for (const auto &[key, v] : root.entries()) {
    if (key == "mode") {
      cfg.mode = run_mode_from_name(v.as_string());
    } else if (key == "seed") {
      cfg.seed = seed_of(v);
    } else if (key == "out_dir") {
      cfg.out_dir = resolve(v.as_string(), base_dir);
    } else if (key == "model") {
      cfg.model = parse_model(v);
    } else if (key == "latents") {
      if (v.is_scalar()) {
        declared = parse_latents_config(read_text(resolve(v.as_string(), base_dir)));
      } else {
        require_mapping(v, "latents");
        declared = latents_config_from_node(v.has("latents_config") ? v.at("latents_config") : v);
      }
    } else if (key == "tasks") {
      if (!v.is_sequence()) throw ConfigError(at_line(v) + "tasks must be a sequence");
      for (const auto &item : v.items()) cfg.tasks.push_back(parse_task(item, base_dir));
    } else if (key == "train") {
      parse_train(v, cfg.train, cfg.csa_k0);
    } else if (key == "ssl") {
      parse_ssl(v, cfg.ssl);
    } else if (key == "from") {
      cfg.from = resolve(v.as_string(), base_dir);
    } else if (key == "eval") {
      require_mapping(v, "eval");
      for (const auto &[ek, ev] : v.entries()) {
        if (ek == "split") cfg.eval_split = ev.as_string();
        else if (ek == "ttsa_k") cfg.ttsa.k = count_of(ev);
        else if (ek == "ttsa_reps") cfg.ttsa.reps = count_of(ev);
        else throw ConfigError(at_line(ev) + "unknown eval key '" + ek + "'");
      }
    } else {
      throw ConfigError(at_line(v) + "unknown top-level key '" + key + "'");
    }
  }
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    cfg.tasks[i].tdef.task_id = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.tasks[j].tdef.name == cfg.tasks[i].tdef.name) {
        throw ConfigError("duplicate task name '" + cfg.tasks[i].tdef.name + "'");
      }
    }
  }
  if (declared) {
    cfg.latents = *declared;
    for (const auto &t : cfg.tasks) {
      const auto need = latents_of(t.tdef);
      for (std::size_t c = 0; c < kLatentCategories; ++c) {
        const auto cat = static_cast<LatentCategory>(c);
        if (!cfg.latents.contains(cat, need.names[c].front())) {
          throw ConfigError("task " + t.tdef.name + ": " + category_name(cat) + " latent '" + need.names[c].front() +
                            "' is not declared");
        }
      }
    }
  } else {
    for (const auto &t : cfg.tasks) merge_latents(cfg.latents, latents_of(t.tdef));
  }
  if (cfg.eval_split != "train" && cfg.eval_split != "val" && cfg.eval_split != "test") {
    throw ConfigError("eval split must be train, val or test");
  }
  return cfg;
}

RunConfig load_run_config(const std::string &path) {
  const std::string base = fs::path(path).parent_path().string();
  return parse_run_config(read_text(path), base.empty() ? "." : base);
}

void apply_overrides(RunConfig &cfg, const RunOverrides &ov) {
  if (ov.seed) cfg.seed = ov.seed;
  if (ov.steps) cfg.train.steps = cfg.ssl.steps = *ov.steps;
  if (ov.lr) cfg.train.lr = cfg.ssl.lr = *ov.lr;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.from) cfg.from = *ov.from;
  if (ov.ttsa) cfg.ttsa = *ov.ttsa;
}

TtsaOptions parse_ttsa(const std::string &text) {
  TtsaOptions t;
  bool has_k = false, has_reps = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("ttsa: expected key=value, got '" + item + "'");
    std::string key = item.substr(0, eq);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string val = item.substr(eq + 1);
    std::size_t n = 0;
    try {
      std::size_t used = 0;
      const long v = std::stol(val, &used);
      if (used != val.size() || v < 1) throw ConfigError("");
      n = static_cast<std::size_t>(v);
    } catch (const std::exception &) {
      throw ConfigError("ttsa: '" + val + "' is not a positive integer");
    }
    if (key == "k" && !has_k) {
      t.k = n;
      has_k = true;
    } else if (key == "reps" && !has_reps) {
      t.reps = n;
      has_reps = true;
    } else {
      throw ConfigError("ttsa: unexpected key '" + key + "'");
    }
  }
  if (!has_k) throw ConfigError("ttsa: K is required");
  return t;
}

void RunConfig::validate(RunMode m) const {
  if (!seed) throw ConfigError("a seed is required (config 'seed' or --seed)");
  if (tasks.empty()) throw ConfigError("no tasks configured");
  if (m == RunMode::train && tasks.size() != 1) {
    throw ConfigError("train runs one task; use multitask for " + std::to_string(tasks.size()));
  }
  if (m == RunMode::multitask && tasks.size() < 2) throw ConfigError("multitask needs at least two tasks");
  if ((m == RunMode::finetune || m == RunMode::eval) && from.empty()) {
    throw ConfigError(std::string(run_mode_name(m)) + " needs a checkpoint (config 'from' or --from)");
  }
  if (csa_k0 > 1 && (m == RunMode::ssl_pretrain || m == RunMode::eval)) {
    throw ConfigError("csa_k0 applies to supervised runs only");
  }
  if (ttsa.k == 0 || ttsa.reps == 0) throw ConfigError("ttsa K and reps must be positive");
  model.validate();
  train.validate();
}

// ---- data ---------------------------------------------------------------

std::vector<DatasetSplits> load_run_data(const RunConfig &cfg) {
  std::vector<DatasetSplits> out;
  const std::uint64_t seed = cfg.seed.value_or(0);
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const auto &t = cfg.tasks[i];
    DatasetSplits s;
    if (!t.archive.empty()) {
      s = load_medmnist_archive(t.archive, t.tdef);
    } else {
      SynthConfig syn;
      syn.input_shape = t.tdef.input_shape;
      syn.num_classes = t.tdef.num_classes;
      syn.noise = t.noise;
      const std::uint64_t base = t.data_seed.value_or(mix_seed(seed, 100 + i));
      syn.samples_per_class = t.samples_per_class;
      syn.seed = base;
      s.train = synth_dataset(syn, t.tdef);
      syn.samples_per_class = t.val_samples_per_class;
      syn.seed = mix_seed(base, 1);
      s.val = synth_dataset(syn, t.tdef);
      s.val.split = "val";
      syn.seed = mix_seed(base, 2);
      s.test = synth_dataset(syn, t.tdef);
      s.test.split = "test";
    }
    if (t.max_train > 0 && s.train.size() > t.max_train) {
      std::vector<std::size_t> rows(t.max_train);
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
      Dataset cut = s.train;
      cut.images = s.train.gather_images(rows);
      cut.labels = s.train.gather_labels(rows);
      s.train = std::move(cut);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- execution ----------------------------------------------------------

namespace {

json metrics_json(const EvalResult &r) {
  json j;
  j["loss"] = r.loss;
  j["accuracy"] = r.metrics.accuracy;
  if (r.metrics.has_auc) j["auc"] = r.metrics.auc;
  return j;
}

json report_json(const RunReport &rep) {
  json j;
  j["steps_run"] = rep.steps_run;
  j["forward_passes"] = rep.forward_passes;
  j["backward_passes"] = rep.backward_passes;
  if (rep.best_value) {
    j["best_value"] = *rep.best_value;
    j["best_step"] = rep.best_step;
    j["best_digest"] = rep.best_digest;
  }
  if (!rep.best_checkpoint.empty()) j["best_checkpoint"] = rep.best_checkpoint;
  if (rep.audited_steps > 0) {
    j["audited_steps"] = rep.audited_steps;
    j["audit_violations"] = rep.audit_violations;
  }
  return j;
}

const Dataset &split_of(const DatasetSplits &s, const std::string &name) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  return s.test;
}

std::vector<TaskDef> defs_of(const RunConfig &cfg) {
  std::vector<TaskDef> v;
  for (const auto &t : cfg.tasks) v.push_back(t.tdef);
  return v;
}

json supervised(Medformer &model, const RunConfig &cfg, const std::vector<DatasetSplits> &splits) {
  std::vector<TaskData> data;
  for (const auto &s : splits) data.push_back({s.train, s.val});
  TrainConfig tc = cfg.train;
  tc.seed = *cfg.seed;
  tc.out_dir = cfg.out_dir;
  json j;
  if (cfg.csa_k0 > 1) {
    const CsaReport rep = run_csa(model, data, tc, cfg.csa_k0);
    json stages = json::array();
    for (const auto &st : rep.stages) {
      json s = report_json(st.report);
      s["k"] = st.k;
      s["start_digest"] = st.start_digest;
      s["best_loss"] = st.best_loss;
      stages.push_back(s);
    }
    j["csa_stages"] = stages;
    j["lineage_ok"] = rep.lineage_ok();
  } else {
    j["report"] = report_json(train(model, data, tc));
  }
  json tasks = json::object();
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const Dataset &ds = splits[i].val.size() > 0 ? splits[i].val : splits[i].train;
    tasks[cfg.tasks[i].tdef.name] = metrics_json(evaluate(model, ds, tc.eval_batch));
  }
  j["final_metrics"] = tasks;
  j["final_digest"] = parameter_digest(model);
  return j;
}

}  // namespace

std::string execute_run(const RunConfig &cfg, RunMode mode) {
  cfg.validate(mode);
  const std::uint64_t seed = *cfg.seed;
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  const auto splits = load_run_data(cfg);
  json j;
  j["mode"] = run_mode_name(mode);
  j["seed"] = seed;

  if (mode == RunMode::eval) {
    Medformer model = load_checkpoint(cfg.from);
    json tasks = json::object();
    for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
      const TaskDef &tdef = model.task(cfg.tasks[i].tdef.name);
      Dataset ds = split_of(splits[i], cfg.eval_split);
      if (ds.size() == 0) throw ConfigError("task " + tdef.name + " has no " + cfg.eval_split + " split");
      ds.tdef = tdef;
      Dataset pool = splits[i].train;
      pool.tdef = tdef;
      tasks[tdef.name] = metrics_json(evaluate(model, ds, cfg.train.eval_batch, cfg.ttsa, &pool, seed));
    }
    j["checkpoint"] = cfg.from;
    j["split"] = cfg.eval_split;
    j["ttsa"] = {{"k", cfg.ttsa.k}, {"reps", cfg.ttsa.reps}};
    j["metrics"] = tasks;
  } else {
    LatentsConfig latents = cfg.latents;
    if (mode == RunMode::finetune) merge_latents(latents, read_checkpoint_info(cfg.from).latents);
    Medformer model(cfg.model, latents, defs_of(cfg), mix_seed(seed, 1));
    if (mode == RunMode::ssl_pretrain) {
      std::vector<Dataset> groups;
      for (const auto &s : splits) groups.push_back(s.train);
      SslTrainConfig sc = cfg.ssl;
      sc.seed = seed;
      sc.out_dir = cfg.out_dir;
      j["report"] = report_json(train_ssl(model, groups, sc));
      j["final_digest"] = parameter_digest(model);
    } else {
      if (mode == RunMode::finetune) {
        j["trunk_tensors_loaded"] = load_trunk_into(model, cfg.from);
        j["from"] = cfg.from;
      }
      j.update(supervised(model, cfg, splits));
    }
  }
  const std::string text = j.dump(2);
  if (!cfg.out_dir.empty()) {
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << text << "\n";
  }
  return text;
}

std::string config_digest(const ModelConfig &cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(yaml::emit(model_config_to_node(cfg)))));
  return buf;
}

std::string inspect_checkpoint(const std::string &path) {
  const CheckpointInfo info = read_checkpoint_info(path);
  json j;
  j["path"] = path;
  j["version"] = info.version;
  j["config_digest"] = config_digest(info.config);
  const auto &c = info.config;
  j["config"] = {{"hidden_dim", c.hidden_dim},         {"main_layers", c.main_layers},
                 {"adapt_in_layers", c.adapt_in_layers}, {"adapt_out_layers", c.adapt_out_layers},
                 {"num_heads", c.num_heads},           {"mlp_ratio", c.mlp_ratio},
                 {"patch_size", c.patch_size},         {"latent_tokens", c.latent_tokens},
                 {"latent_dim", c.latent_dim},         {"expander_widths", c.expander_widths},
                 {"dtype", dtype_name(c.dtype)}};
  j["parameter_count"] = info.parameter_count();
  j["tensor_count"] = info.params.size();
  json lat = json::object();
  for (std::size_t k = 0; k < kLatentCategories; ++k) {
    lat[category_name(static_cast<LatentCategory>(k))] = info.latents.names[k];
  }
  j["latents"] = lat;
  json tasks = json::array();
  for (const auto &t : info.tasks) tasks.push_back(t.name);
  j["tasks"] = tasks;
  j["has_expander"] = info.has_expander;
  j["has_optimizer"] = info.has_optimizer;
  j["seed"] = info.seed;
  return j.dump(2);
}

}  // namespace mdf

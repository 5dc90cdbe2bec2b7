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
#include "mdf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <set>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

// ---- steps ------------------------------------------------------------

namespace {

double run_pass(const LossFn &loss) {
  GradTape tape;
  TapeScope scope(tape);
  Tensor l = loss();
  const double v = l.item();
  if (!std::isfinite(v)) throw DivergenceError("loss is " + std::to_string(v));
  backward(l, tape);
  return v;
}

}  // namespace

StepStats standard_step(const ParamList &params, const LossFn &loss, Optimizer &opt, double lr, double clip,
                        const PassHook &hook) {
  StepStats s;
  zero_grads(params);
  s.loss = run_pass(loss);
  s.forward_passes = s.backward_passes = 1;
  if (hook) hook(0);
  check_finite_grads(params);
  s.grad_norm = clip_grad_norm(params, clip);
  opt.step(params, lr);
  return s;
}

StepStats backforward_step(const std::vector<ParamList> &groups, const LossFn &loss, Optimizer &opt, double lr,
                           double clip, bool reverse, const PassHook &hook) {
  if (groups.empty()) throw ContractError("backforward_step: no layer groups");
  ParamList all;
  for (const auto &g : groups) all.insert(all.end(), g.begin(), g.end());
  StepStats s;
  for (std::size_t pass = 0; pass < groups.size(); ++pass) {
    const std::size_t g = reverse ? groups.size() - 1 - pass : pass;
    zero_grads(all);
    const double l = run_pass(loss);
    ++s.forward_passes;
    ++s.backward_passes;
    if (hook) hook(pass);
    check_finite_grads(all);
    const double norm = clip_grad_norm(all, clip);
    if (pass == 0) {
      s.loss = l;
      s.grad_norm = norm;
    }
    opt.step(groups[g], lr);
  }
  return s;
}

// ---- config and report ------------------------------------------------

TrainMode train_mode_from_name(const std::string &name) {
  if (name == "standard") return TrainMode::standard;
  if (name == "backforward") return TrainMode::backforward;
  throw ConfigError("unknown training mode '" + name + "' (standard or backforward)");
}

ScheduleConfig TrainConfig::schedule() const {
  ScheduleConfig s;
  s.max_lr = lr;
  s.total_steps = steps;
  s.warmup_frac = warmup_frac;
  s.div_factor = div_factor;
  s.final_div_factor = final_div_factor;
  return s;
}

void TrainConfig::validate() const {
  schedule().validate();
  if (batch_size == 0 || batch_size_3d == 0 || eval_batch == 0) throw ConfigError("batch sizes must be positive");
  if (sum_k == 0) throw ConfigError("sum augmentation group size must be at least 1");
  if (weight_decay < 0) throw ConfigError("weight decay must be nonnegative");
}

std::string ReportRecord::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["kind"] = kind;
  j["task"] = task;
  j["loss"] = loss;
  j["lr"] = lr;
  if (accuracy) j["accuracy"] = *accuracy;
  if (auc) j["auc"] = *auc;
  return j.dump();
}

std::string RunReport::to_jsonl() const {
  std::string out;
  for (const auto &r : records) out += r.to_json() + "\n";
  return out;
}

std::vector<double> RunReport::task_losses(const std::string &task) const {
  std::vector<double> out;
  for (const auto &r : records) {
    if (r.kind == "train" && r.task == task) out.push_back(r.loss);
  }
  return out;
}

// ---- evaluation -------------------------------------------------------

EvalResult evaluate(const Medformer &model, const Dataset &ds, std::size_t batch, const TtsaOptions &ttsa,
                    const Dataset *pool, std::uint64_t seed) {
  if (ds.size() == 0) throw InputError("evaluate: empty dataset");
  if (batch == 0) throw ParameterError("evaluate: batch must be positive");
  const TaskDef &tdef = model.task(ds.tdef.name);
  const DType dt = model.config().dtype;
  NoGradScope no_grad;
  Rng rng(seed);
  const Tensor pool_images = (pool ? pool->images : ds.images).to(dt);
  std::vector<Tensor> parts;
  for (std::size_t start = 0; start < ds.size(); start += batch) {
    std::vector<std::size_t> rows(std::min(batch, ds.size() - start));
    std::iota(rows.begin(), rows.end(), start);
    const Tensor x = ds.gather_images(rows).to(dt);
    if (ttsa.k > 1 || ttsa.reps > 1) {
      parts.push_back(test_time_sum_augment(
          x, pool_images, ttsa.k, ttsa.reps, [&](const Tensor &b) { return model.forward(b, tdef); }, rng));
    } else {
      parts.push_back(model.forward(x, tdef));
    }
  }
  const Tensor logits = parts.size() == 1 ? parts[0] : ops::concat(parts, 0);
  EvalResult r;
  r.loss = task_loss(logits, make_targets(ds.labels, tdef, logits.dtype()), tdef.type).item();
  r.metrics = evaluate_logits(logits, ds.labels, tdef);
  return r;
}

std::string audit_gradient_isolation(const Medformer &model, const TaskDef &tdef) {
  const std::set<std::string> expected = {
      LatentBank::param_name(LatentCategory::dimension, tdef.dim_latent),
      LatentBank::param_name(LatentCategory::modality, tdef.modality_latent),
      LatentBank::param_name(LatentCategory::body_part, tdef.body_latent),
      LatentBank::param_name(LatentCategory::task, tdef.task_latent),
      "head." + tdef.head_id + ".w",
      "head." + tdef.head_id + ".b",
  };
  std::string unexpected, silent;
  for (const auto &p : model.parameters()) {
    if (p.name.rfind("latent.", 0) != 0 && p.name.rfind("head.", 0) != 0) continue;
    const auto g = p.tensor.grad();
    const bool nonzero = std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; });
    const bool want = expected.count(p.name) > 0;
    if (nonzero && !want) unexpected += " " + p.name;
    if (!nonzero && want) silent += " " + p.name;
  }
  std::string msg;
  if (!unexpected.empty()) msg += "gradient leaked into" + unexpected;
  if (!silent.empty()) msg += std::string(msg.empty() ? "" : "; ") + "no gradient for" + silent;
  return msg;
}

// ---- supervised -------------------------------------------------------

namespace {

Tensor augment_rows(const Tensor &x, const AugPipeline &pipe, Rng &rng) {
  const std::size_t n = x.dim(0), per = x.numel() / n;
  const Shape sample(x.shape().begin() + 1, x.shape().end());
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < n; ++i) {
    Tensor s = Tensor::from(sample, std::vector<double>(x.data().begin() + i * per, x.data().begin() + (i + 1) * per),
                            x.dtype());
    Tensor a = apply_pipeline(s, pipe, rng);
    std::copy(a.data().begin(), a.data().end(), out.begin() + i * per);
  }
  return Tensor::from(x.shape(), std::move(out), x.dtype());
}

class ReportSink {
 public:
  explicit ReportSink(const std::string &dir) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    out_.open(std::filesystem::path(dir) / "report.jsonl", std::ios::trunc);
    if (!out_) throw Error(dir + ": cannot write report.jsonl");
  }
  void add(RunReport &rep, ReportRecord r) {
    if (out_.is_open()) {
      out_ << r.to_json() << '\n';
      out_.flush();
    }
    rep.records.push_back(std::move(r));
  }

 private:
  std::ofstream out_;
};

std::string meta_json(std::size_t step, const std::string &metric, double value) {
  nlohmann::json j;
  j["step"] = step;
  j["metric"] = metric;
  j["value"] = value;
  return j.dump();
}

}  // namespace

RunReport train(Medformer &model, const std::vector<TaskData> &data, const TrainConfig &cfg,
                const StepObserver &observer) {
  cfg.validate();
  if (data.empty()) throw ConfigError("train: no task data");
  std::vector<const TaskDef *> tdefs;
  std::vector<std::size_t> sizes, batches;
  for (const auto &td : data) {
    const TaskDef &tdef = model.task(td.train.tdef.name);
    td.train.validate();
    if (td.val.size() > 0) td.val.validate();
    tdefs.push_back(&tdef);
    sizes.push_back(td.train.size());
    batches.push_back(std::min(td.train.size(), tdef.dims == 3 ? cfg.batch_size_3d : cfg.batch_size));
  }
  const Rng root(cfg.seed);
  MultitaskSampler sampler(sizes, batches, root.derive(1).seed());
  Rng aug_rng = root.derive(2);
  Rng drop_rng = root.derive(3);
  const bool use_dropout = cfg.dropout && model.config().dropout > 0.0;
  AdamWConfig ocfg;
  ocfg.weight_decay = cfg.weight_decay;
  AdamW opt(ocfg);
  const ScheduleConfig sched = cfg.schedule();
  const ParamList params = model.parameters();
  const std::vector<ParamList> groups = cfg.mode == TrainMode::backforward ? model.layer_groups() : std::vector<ParamList>{};
  const DType dt = model.config().dtype;

  RunReport rep;
  ReportSink sink(cfg.out_dir);
  const std::string ckpt_path =
      cfg.out_dir.empty() ? std::string() : (std::filesystem::path(cfg.out_dir) / cfg.checkpoint_name).string();

  auto eval_point = [&](std::size_t step, double lr) -> bool {
    double auc_sum = 0.0, acc_sum = 0.0, loss_sum = 0.0;
    std::size_t auc_n = 0;
    bool all_fit = cfg.stop_at_accuracy.has_value();
    for (std::size_t t = 0; t < data.size(); ++t) {
      const Dataset &ds = (data[t].val.size() > 0 && !cfg.eval_on_train) ? data[t].val : data[t].train;
      const EvalResult r = evaluate(model, ds, cfg.eval_batch);
      ReportRecord rec{step, "eval", tdefs[t]->name, r.loss, lr, r.metrics.accuracy, std::nullopt};
      if (r.metrics.has_auc) {
        rec.auc = r.metrics.auc;
        auc_sum += r.metrics.auc;
        ++auc_n;
      }
      sink.add(rep, rec);
      acc_sum += r.metrics.accuracy;
      loss_sum += r.loss;
      if (cfg.stop_at_accuracy) {
        const double train_acc = &ds == &data[t].train ? r.metrics.accuracy
                                                       : evaluate(model, data[t].train, cfg.eval_batch).metrics.accuracy;
        all_fit = all_fit && train_acc >= *cfg.stop_at_accuracy;
      }
    }
    const double n = static_cast<double>(data.size());
    const bool by_loss = cfg.best_by == BestBy::loss;
    const double value = by_loss ? loss_sum / n : (auc_n ? auc_sum / static_cast<double>(auc_n) : acc_sum / n);
    const bool better = !rep.best_value || (by_loss ? value < *rep.best_value : value > *rep.best_value);
    if (better) {
      rep.best_value = value;
      rep.best_step = step;
      rep.best_params = snapshot(params);
      rep.best_digest = parameter_digest(params);
      if (!ckpt_path.empty()) {
        save_checkpoint(ckpt_path, model, &opt, meta_json(step, by_loss ? "loss" : "auc", value));
        rep.best_checkpoint = ckpt_path;
      }
    }
    return all_fit;
  };

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const double lr = onecycle_lr(step - 1, sched);
    rep.lr_trace.push_back(lr);
    const SampledBatch b = sampler.next();
    const TaskData &td = data[b.task];
    const TaskDef &tdef = *tdefs[b.task];
    Tensor x = td.train.gather_images(b.rows).to(dt);
    if (cfg.augment) x = augment_rows(x, cfg.pipeline, aug_rng);
    Tensor y = make_targets(td.train.gather_labels(b.rows), tdef, dt);
    if (cfg.sum_k > 1) std::tie(x, y) = sum_augment_batch(x, y, cfg.sum_k, aug_rng);
    const LossFn loss = [&] {
      return task_loss(model.forward(x, tdef, use_dropout ? &drop_rng : nullptr), y, tdef.type);
    };
    const bool audit = cfg.audit_every > 0 && step >= 2 && (step - 2) % cfg.audit_every == 0;
    const PassHook hook = [&](std::size_t pass) {
      if (!audit || pass != 0) return;
      ++rep.audited_steps;
      const std::string msg = audit_gradient_isolation(model, tdef);
      if (!msg.empty()) {
        ++rep.audit_violations;
        rep.audit_messages.push_back("step " + std::to_string(step) + " (" + tdef.name + "): " + msg);
      }
    };
    StepStats st;
    try {
      st = cfg.mode == TrainMode::standard
               ? standard_step(params, loss, opt, lr, cfg.clip_norm, hook)
               : backforward_step(groups, loss, opt, lr, cfg.clip_norm, cfg.reverse_layers, hook);
    } catch (const NumericError &e) {
      throw DivergenceError("step " + std::to_string(step) + ", task " + tdef.name + ": " + e.what());
    } catch (const DivergenceError &e) {
      throw DivergenceError("step " + std::to_string(step) + ", task " + tdef.name + ": " + e.what());
    }
    rep.steps_run = step;
    rep.forward_passes += st.forward_passes;
    rep.backward_passes += st.backward_passes;
    sink.add(rep, {step, "train", tdef.name, st.loss, lr, std::nullopt, std::nullopt});
    if (observer) observer(step, tdef.name, st.loss);
    const bool at_eval = step == cfg.steps || (cfg.eval_every > 0 && step % cfg.eval_every == 0);
    if (at_eval && eval_point(step, lr)) break;
  }
  return rep;
}

// ---- self-supervised --------------------------------------------------

RunReport train_ssl(Medformer &model, const std::vector<Dataset> &groups, const SslTrainConfig &cfg) {
  if (groups.empty()) throw ConfigError("train_ssl: no data");
  if (cfg.eval_every == 0) throw ConfigError("train_ssl: eval_every must be positive");
  ScheduleConfig sched;
  sched.max_lr = cfg.lr;
  sched.total_steps = cfg.steps;
  sched.warmup_frac = cfg.warmup_frac;
  sched.validate();
  model.ensure_expander();
  std::vector<const TaskDef *> tdefs;
  std::vector<std::size_t> sizes;
  for (const auto &g : groups) {
    tdefs.push_back(&model.task(g.tdef.name));
    if (g.size() < 2) throw ConfigError("train_ssl: group " + g.tdef.name + " needs at least two samples");
    sizes.push_back(g.size());
  }
  const Rng root(cfg.seed);
  MultitaskSampler sampler(sizes, std::max<std::size_t>(2, cfg.batch_size), root.derive(1).seed());
  Rng aug_rng = root.derive(2);
  Rng drop_rng = root.derive(3);
  const bool use_dropout = model.config().dropout > 0.0;
  AdamWConfig ocfg;
  ocfg.weight_decay = cfg.weight_decay;
  AdamW opt(ocfg);
  const ParamList params = model.parameters();
  const DType dt = model.config().dtype;
  RunReport rep;
  ReportSink sink(cfg.out_dir);
  const std::string ckpt_path =
      cfg.out_dir.empty() ? std::string() : (std::filesystem::path(cfg.out_dir) / cfg.checkpoint_name).string();
  double window = 0.0;
  std::size_t in_window = 0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const double lr = onecycle_lr(step - 1, sched);
    rep.lr_trace.push_back(lr);
    SampledBatch b = sampler.next();
    while (b.rows.size() < 2) b = sampler.next();
    const std::vector<SslGroup> batch{{groups[b.task].gather_images(b.rows).to(dt), tdefs[b.task]}};
    const LossFn loss = [&] {
      return ssl_loss(model, batch, cfg.ssl, aug_rng, use_dropout ? &drop_rng : nullptr).loss;
    };
    StepStats st;
    try {
      st = standard_step(params, loss, opt, lr, cfg.clip_norm);
    } catch (const NumericError &e) {
      throw DivergenceError("ssl step " + std::to_string(step) + ": " + e.what());
    } catch (const DivergenceError &e) {
      throw DivergenceError("ssl step " + std::to_string(step) + ": " + e.what());
    }
    rep.steps_run = step;
    rep.forward_passes += st.forward_passes;
    rep.backward_passes += st.backward_passes;
    sink.add(rep, {step, "ssl", tdefs[b.task]->name, st.loss, lr, std::nullopt, std::nullopt});
    window += st.loss;
    ++in_window;
    if (step % cfg.eval_every == 0 || step == cfg.steps) {
      const double mean = window / static_cast<double>(in_window);
      window = 0.0;
      in_window = 0;
      if (!rep.best_value || mean < *rep.best_value) {
        rep.best_value = mean;
        rep.best_step = step;
        rep.best_params = snapshot(params);
        rep.best_digest = parameter_digest(params);
        if (!ckpt_path.empty()) {
          save_checkpoint(ckpt_path, model, &opt, meta_json(step, "ssl_loss", mean));
          rep.best_checkpoint = ckpt_path;
        }
      }
    }
  }
  return rep;
}

// ---- cascading sum augmentation ---------------------------------------

bool CsaReport::lineage_ok() const {
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i].start_digest != stages[i - 1].best_digest) return false;
  }
  return !stages.empty();
}

CsaReport run_csa(Medformer &model, const std::vector<TaskData> &data, const TrainConfig &cfg, std::size_t k0) {
  CsaReport out;
  const ParamList params = model.parameters();
  for (std::size_t k : cascade_schedule(k0)) {
    CsaStage st;
    st.k = k;
    st.start_digest = parameter_digest(params);
    TrainConfig c = cfg;
    c.sum_k = k;
    c.best_by = BestBy::loss;
    c.stop_at_accuracy.reset();
    c.checkpoint_name = "csa_k" + std::to_string(k) + ".ckpt";
    if (!cfg.out_dir.empty()) c.out_dir = (std::filesystem::path(cfg.out_dir) / ("k" + std::to_string(k))).string();
    st.report = train(model, data, c);
    if (!st.report.best_value) throw ContractError("csa stage produced no checkpoint");
    st.best_loss = *st.report.best_value;
    st.best_digest = st.report.best_digest;
    if (!st.report.best_checkpoint.empty()) {
      const Medformer best = load_checkpoint(st.report.best_checkpoint);
      restore(params, snapshot(best.parameters()));
    } else {
      restore(params, st.report.best_params);
    }
    out.stages.push_back(std::move(st));
  }
  return out;
}

}  // namespace mdf

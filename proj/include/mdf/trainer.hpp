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
#ifndef MDF_TRAINER_HPP_
#define MDF_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdf/augment.hpp"
#include "mdf/checkpoint.hpp"
#include "mdf/data.hpp"
#include "mdf/medformer.hpp"
#include "mdf/metrics.hpp"
#include "mdf/optim.hpp"
#include "mdf/ssl.hpp"

namespace mdf {

// ---- sampling ---------------------------------------------------------

struct SampledBatch {
  std::size_t task = 0;
  std::vector<std::size_t> rows;
};

/// Each epoch shuffles the combined (task, row) index and cuts it into
/// single-task batches in order of appearance; leftovers are flushed at the
/// end of the epoch. Every row is emitted exactly once per epoch.
class MultitaskSampler {
 public:
  /// One batch size per task. ConfigError on an empty task or batch size 0.
  MultitaskSampler(std::vector<std::size_t> sizes, std::vector<std::size_t> batch_sizes, std::uint64_t seed);
  MultitaskSampler(std::vector<std::size_t> sizes, std::size_t batch_size, std::uint64_t seed);

  std::vector<SampledBatch> epoch();
  /// Next batch of the running epoch, starting a new one when exhausted.
  SampledBatch next();
  std::size_t epochs_started() const { return epochs_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> batch_sizes_;
  Rng rng_;
  std::vector<SampledBatch> pending_;
  std::size_t cursor_ = 0;
  std::size_t epochs_ = 0;
};

// ---- single steps -----------------------------------------------------

/// Builds the scalar loss on the active tape.
using LossFn = std::function<Tensor()>;
/// Called after every backward pass with the pass index, before updating.
using PassHook = std::function<void(std::size_t pass)>;

struct StepStats {
  double loss = 0.0;  // loss of the first pass
  std::size_t forward_passes = 0;
  std::size_t backward_passes = 0;
  double grad_norm = 0.0;  // before clipping, first pass
};

/// Forward, backward, clip (global norm over `params`), update all.
StepStats standard_step(const ParamList &params, const LossFn &loss, Optimizer &opt, double lr, double clip = 1.0,
                        const PassHook &hook = nullptr);

/// For each group in order (reversed when `reverse`): fresh forward with
/// the current weights, backward, clip, update that group only. Layer i's
/// update therefore sees every earlier group's update from this batch.
StepStats backforward_step(const std::vector<ParamList> &groups, const LossFn &loss, Optimizer &opt, double lr,
                           double clip = 1.0, bool reverse = false, const PassHook &hook = nullptr);

// ---- supervised training ----------------------------------------------

enum class TrainMode { standard, backforward };
enum class BestBy { auc, loss };

TrainMode train_mode_from_name(const std::string &name);

struct TrainConfig {
  TrainMode mode = TrainMode::standard;
  bool reverse_layers = false;
  std::size_t steps = 100;
  std::size_t batch_size = 64;
  std::size_t batch_size_3d = 32;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double warmup_frac = 0.05;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  double clip_norm = 1.0;
  /// Sum augmentation group size; 1 disables.
  std::size_t sum_k = 1;
  bool augment = false;
  AugPipeline pipeline = AugPipeline::standard();
  bool dropout = true;
  /// Evaluate (and maybe checkpoint) every n steps and after the last; 0 = last only.
  std::size_t eval_every = 0;
  std::size_t eval_batch = 128;
  /// Gradient-isolation audit every n steps, from step 2; 0 = off.
  std::size_t audit_every = 0;
  BestBy best_by = BestBy::auc;
  /// Stop once every task's train accuracy reaches this at an eval point.
  std::optional<double> stop_at_accuracy;
  /// Evaluate on the train split even when a validation split exists.
  bool eval_on_train = false;
  std::uint64_t seed = 0;
  /// Directory for report.jsonl and best.ckpt; empty writes nothing.
  std::string out_dir;
  std::string checkpoint_name = "best.ckpt";

  ScheduleConfig schedule() const;
  void validate() const;
};

struct TaskData {
  Dataset train;
  Dataset val;  // may be empty
};

struct ReportRecord {
  std::size_t step = 0;
  std::string kind;  // "train", "eval" or "ssl"
  std::string task;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> accuracy;
  std::optional<double> auc;

  std::string to_json() const;
};

struct RunReport {
  std::vector<ReportRecord> records;
  std::vector<double> lr_trace;  // lr used at each step
  std::size_t steps_run = 0;
  std::size_t forward_passes = 0;
  std::size_t backward_passes = 0;
  std::optional<double> best_value;
  std::size_t best_step = 0;
  std::string best_digest;
  std::string best_checkpoint;  // path, when written
  ParamSnapshot best_params;
  std::size_t audited_steps = 0;
  std::size_t audit_violations = 0;
  std::vector<std::string> audit_messages;

  std::string to_jsonl() const;
  /// Train-loss records of one task, in step order.
  std::vector<double> task_losses(const std::string &task) const;
};

struct EvalResult {
  double loss = 0.0;
  TaskMetrics metrics;
};

struct TtsaOptions {
  std::size_t k = 1;
  std::size_t reps = 1;
};

/// Mean loss, accuracy and AUC of the model on a dataset, without dropout.
/// With TTSA K > 1, logits are averaged over hybrids with partners drawn
/// from `pool` (defaults to the dataset itself).
EvalResult evaluate(const Medformer &model, const Dataset &ds, std::size_t batch = 128, const TtsaOptions &ttsa = {},
                    const Dataset *pool = nullptr, std::uint64_t seed = 0);

/// Category-specific parameters (latents and heads) with a nonzero
/// gradient must be exactly the task's three input latents, its task latent
/// and its head. Returns a description of the violation, empty when clean.
std::string audit_gradient_isolation(const Medformer &model, const TaskDef &tdef);

/// Observer called after each optimizer step with the step index (1-based)
/// and that step's loss.
using StepObserver = std::function<void(std::size_t step, const std::string &task, double loss)>;

/// Supervised single- or multi-task training. Non-finite losses or
/// gradients raise DivergenceError after the report (and best checkpoint,
/// if any) has been written.
RunReport train(Medformer &model, const std::vector<TaskData> &data, const TrainConfig &cfg,
                const StepObserver &observer = nullptr);

// ---- self-supervised --------------------------------------------------

struct SslTrainConfig {
  SslOptions ssl;
  std::size_t steps = 200;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double warmup_frac = 0.05;
  double clip_norm = 1.0;
  std::size_t eval_every = 20;  // loss window for best tracking
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string checkpoint_name = "ssl_best.ckpt";
};

/// Unlabeled groups of different domains; each step embeds one
/// single-domain batch. Best = lowest mean loss over an eval window.
RunReport train_ssl(Medformer &model, const std::vector<Dataset> &groups, const SslTrainConfig &cfg);

// ---- cascading sum augmentation ---------------------------------------

struct CsaStage {
  std::size_t k = 1;
  std::string start_digest;
  std::string best_digest;
  double best_loss = 0.0;
  RunReport report;
};

struct CsaReport {
  std::vector<CsaStage> stages;
  /// Every stage after the first starts from its predecessor's best.
  bool lineage_ok() const;
};

/// Runs cascade_schedule(k0), each stage a full `cfg` run with sum_k = K and
/// best = lowest validation loss; the next stage resumes from that best
/// (read back from disk when cfg.out_dir is set).
CsaReport run_csa(Medformer &model, const std::vector<TaskData> &data, const TrainConfig &cfg, std::size_t k0);

}  // namespace mdf

#endif  // MDF_TRAINER_HPP_

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
#ifndef MDF_OPTIM_HPP_
#define MDF_OPTIM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdf/nn.hpp"

namespace mdf {

/// Updates parameters in place from their accumulated gradients. State is
/// keyed by parameter name, so subsets of a model may be stepped separately.
/// Parameters without a gradient buffer are left alone.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Throws DivergenceError naming the first parameter with a non-finite
  /// gradient; nothing is modified in that case.
  virtual void step(const ParamList &params, double lr) = 0;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t steps = 0;
};

/// w <- w (1 - lr wd), then the bias-corrected Adam update
/// w <- w - lr mhat / (sqrt(vhat) + eps).
class AdamW : public Optimizer {
 public:
  explicit AdamW(AdamWConfig cfg = {});
  void step(const ParamList &params, double lr) override;

  const AdamWConfig &config() const { return cfg_; }
  const std::map<std::string, AdamState> &state() const { return state_; }
  std::map<std::string, AdamState> &state() { return state_; }

 private:
  AdamWConfig cfg_;
  std::map<std::string, AdamState> state_;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double momentum = 0.0) : momentum_(momentum) {}
  void step(const ParamList &params, double lr) override;

 private:
  double momentum_;
  std::map<std::string, std::vector<double>> velocity_;
};

/// Throws DivergenceError if any gradient is NaN or infinite.
void check_finite_grads(const ParamList &params);
double global_grad_norm(const ParamList &params);
/// Scales every gradient by max_norm / norm when the global norm exceeds
/// max_norm. Returns the norm before clipping. max_norm <= 0 disables.
double clip_grad_norm(const ParamList &params, double max_norm);
void zero_grads(const ParamList &params);

struct ScheduleConfig {
  double max_lr = 1e-3;
  std::size_t total_steps = 100;
  double warmup_frac = 0.05;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  /// Step at which the rate peaks: round(warmup_frac * total_steps), at least 1.
  std::size_t warmup_end() const;
  void validate() const;
};

/// Cosine warmup from max_lr/div_factor to max_lr, then cosine decay to
/// max_lr/(div_factor*final_div_factor) at total_steps.
double onecycle_lr(std::size_t step, const ScheduleConfig &cfg);

}  // namespace mdf

#endif  // MDF_OPTIM_HPP_

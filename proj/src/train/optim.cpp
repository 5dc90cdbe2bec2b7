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
#include "mdf/optim.hpp"

#include <cmath>
#include <numbers>

#include "mdf/error.hpp"

namespace mdf {

void check_finite_grads(const ParamList &params) {
  for (const auto &p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw DivergenceError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
}

double global_grad_norm(const ParamList &params) {
  double s = 0.0;
  for (const auto &p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) s += g * g;
  }
  return std::sqrt(s);
}

double clip_grad_norm(const ParamList &params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / (norm + 1e-12);
    for (const auto &p : params) {
      Tensor t = p.tensor;
      if (!t.has_grad()) continue;
      for (auto &g : t.grad_buffer()) g *= f;
    }
  }
  return norm;
}

void zero_grads(const ParamList &params) {
  for (const auto &p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

AdamW::AdamW(AdamWConfig cfg) : cfg_(cfg) {
  if (!(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1 && cfg.eps > 0 && cfg.weight_decay >= 0)) {
    throw ParameterError("invalid AdamW hyperparameters");
  }
}

void AdamW::step(const ParamList &params, double lr) {
  check_finite_grads(params);
  for (const auto &p : params) {
    Tensor t = p.tensor;
    if (!t.has_grad()) continue;
    const auto g = t.grad();
    auto w = t.mutable_data();
    auto &st = state_[p.name];
    if (st.m.size() != w.size()) {
      if (!st.m.empty()) throw DimensionError("AdamW state for '" + p.name + "' has the wrong size");
      st.m.assign(w.size(), 0.0);
      st.v.assign(w.size(), 0.0);
    }
    ++st.steps;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(st.steps));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(st.steps));
    const double decay = 1.0 - lr * cfg_.weight_decay;
    for (std::size_t i = 0; i < w.size(); ++i) {
      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g[i];
      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      w[i] = round_to(t.dtype(), w[i] * decay - lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
  }
}

void Sgd::step(const ParamList &params, double lr) {
  check_finite_grads(params);
  for (const auto &p : params) {
    Tensor t = p.tensor;
    if (!t.has_grad()) continue;
    const auto g = t.grad();
    auto w = t.mutable_data();
    if (momentum_ == 0.0) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = round_to(t.dtype(), w[i] - lr * g[i]);
      continue;
    }
    auto &vel = velocity_[p.name];
    if (vel.empty()) vel.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      vel[i] = momentum_ * vel[i] + g[i];
      w[i] = round_to(t.dtype(), w[i] - lr * vel[i]);
    }
  }
}

std::size_t ScheduleConfig::warmup_end() const {
  const auto e = static_cast<std::size_t>(std::llround(warmup_frac * static_cast<double>(total_steps)));
  return std::max<std::size_t>(1, std::min(e, total_steps - 1));
}

void ScheduleConfig::validate() const {
  if (!(max_lr > 0)) throw ConfigError("schedule: max_lr must be positive");
  if (total_steps < 2) throw ConfigError("schedule: total_steps must be at least 2");
  if (!(warmup_frac > 0 && warmup_frac < 1)) throw ConfigError("schedule: warmup fraction must lie in (0, 1)");
  if (!(div_factor > 0) || !(final_div_factor > 0)) throw ConfigError("schedule: division factors must be positive");
}

double onecycle_lr(std::size_t step, const ScheduleConfig &cfg) {
  cfg.validate();
  if (step > cfg.total_steps) {
    throw ParameterError("onecycle_lr: step " + std::to_string(step) + " beyond " + std::to_string(cfg.total_steps));
  }
  const double initial = cfg.max_lr / cfg.div_factor;
  const double final_lr = initial / cfg.final_div_factor;
  const std::size_t w = cfg.warmup_end();
  auto anneal = [](double from, double to, double frac) {
    return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  };
  if (step <= w) return anneal(initial, cfg.max_lr, static_cast<double>(step) / static_cast<double>(w));
  return anneal(cfg.max_lr, final_lr,
                static_cast<double>(step - w) / static_cast<double>(cfg.total_steps - w));
}

}  // namespace mdf

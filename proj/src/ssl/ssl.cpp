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
#include "mdf/ssl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

namespace {

void check_pair(const Tensor &a, const Tensor &b, const char *who) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError(std::string(who) + ": views " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " must both be [B, dz]");
  }
  if (a.dim(0) < 2) throw BatchError(std::string(who) + ": batch of " + std::to_string(a.dim(0)) + " is too small");
}

Tensor centered(const Tensor &z) { return ops::sub(z, ops::mean(z, 0, true)); }

Tensor off_diagonal_mask(std::size_t d, DType dt) {
  Tensor m = Tensor::ones({d, d}, dt);
  for (std::size_t i = 0; i < d; ++i) m.mutable_data()[i * d + i] = 0.0;
  return m;
}

Tensor variance_term(const Tensor &z, const VicregWeights &w) {
  const double b = static_cast<double>(z.dim(0));
  Tensor var = ops::scale(ops::sum(ops::square(centered(z)), 0), 1.0 / (b - 1.0));
  Tensor std = ops::sqrt(ops::add_scalar(var, w.var_eps));
  return ops::mean(ops::relu(ops::add_scalar(ops::neg(std), w.gamma)));
}

Tensor covariance_term(const Tensor &z) {
  const double b = static_cast<double>(z.dim(0));
  const std::size_t d = z.dim(1);
  Tensor c = centered(z);
  Tensor cov = ops::scale(ops::matmul(ops::transpose(c), c), 1.0 / (b - 1.0));
  if (d < 2) return ops::scale(ops::sum(cov), 0.0);
  Tensor off = ops::mul(ops::square(cov), off_diagonal_mask(d, z.dtype()));
  return ops::scale(ops::sum(off), 1.0 / static_cast<double>(d * (d - 1)));
}

}  // namespace

VicregTerms vicreg_loss(const Tensor &e1, const Tensor &e2, const VicregWeights &w) {
  check_pair(e1, e2, "vicreg_loss");
  if (w.inv_mse < 0 || w.inv_cos < 0 || w.var_coeff < 0 || w.cov_coeff < 0 || w.gamma < 0 || w.var_eps < 0) {
    throw ParameterError("vicreg weights must be nonnegative");
  }
  VicregTerms t;
  t.mse = ops::mean(ops::square(ops::sub(e1, e2)));
  Tensor dot = ops::sum(ops::mul(e1, e2), -1);
  Tensor n2 = ops::mul(ops::sum(ops::square(e1), -1), ops::sum(ops::square(e2), -1));
  Tensor cos = ops::div(dot, ops::sqrt(ops::add_scalar(n2, 1e-16)));
  t.cosine = ops::mean(ops::add_scalar(ops::neg(cos), 1.0));
  t.invariance = ops::add(ops::scale(t.mse, w.inv_mse), ops::scale(t.cosine, w.inv_cos));
  t.variance = ops::scale(ops::add(variance_term(e1, w), variance_term(e2, w)), 0.5);
  t.covariance = ops::scale(ops::add(covariance_term(e1), covariance_term(e2)), 0.5);
  t.total = ops::add(ops::add(t.invariance, ops::scale(t.variance, w.var_coeff)), ops::scale(t.covariance, w.cov_coeff));
  return t;
}

namespace {

Tensor standardize_columns(const Tensor &z) {
  const double b = static_cast<double>(z.dim(0));
  Tensor c = centered(z);
  Tensor var = ops::scale(ops::sum(ops::square(c), 0, true), 1.0 / b);
  for (std::size_t j = 0; j < var.numel(); ++j) {
    if (!(var.data()[j] > 0.0)) {
      throw BatchError("barlow_twins_loss: column " + std::to_string(j) + " has zero variance");
    }
  }
  return ops::div(c, ops::sqrt(var));
}

}  // namespace

Tensor barlow_twins_loss(const Tensor &z1, const Tensor &z2, double lambda) {
  check_pair(z1, z2, "barlow_twins_loss");
  if (lambda < 0) throw ParameterError("barlow lambda must be nonnegative");
  const std::size_t d = z1.dim(1);
  const double b = static_cast<double>(z1.dim(0));
  Tensor c = ops::scale(ops::matmul(ops::transpose(standardize_columns(z1)), standardize_columns(z2)), 1.0 / b);
  Tensor off = off_diagonal_mask(d, c.dtype());
  Tensor eye = ops::add_scalar(ops::neg(off), 1.0);
  Tensor on = ops::sum(ops::mul(ops::square(ops::sub(c, eye)), eye));
  Tensor redundancy = ops::sum(ops::mul(ops::square(c), off));
  return ops::add(on, ops::scale(redundancy, lambda));
}

Tensor cross_correlation(const Tensor &z1, const Tensor &z2) {
  check_pair(z1, z2, "cross_correlation");
  NoGradScope ng;
  return ops::scale(ops::matmul(ops::transpose(standardize_columns(z1)), standardize_columns(z2)),
                    1.0 / static_cast<double>(z1.dim(0)));
}

std::pair<Tensor, Tensor> augmented_pair(const Tensor &x, std::size_t sample_rank, const AugPipeline &pipe, Rng &rng) {
  if (x.rank() != sample_rank + 1 || x.dim(0) == 0) {
    throw InputError("augmented_pair: expected a batch of rank-" + std::to_string(sample_rank) + " samples, got " +
                     shape_str(x.shape()));
  }
  const std::size_t n = x.dim(0);
  const std::size_t per = x.numel() / n;
  const Shape sample(x.shape().begin() + 1, x.shape().end());
  std::vector<double> va(x.numel()), vb(x.numel());
  for (std::size_t i = 0; i < n; ++i) {
    Tensor s = Tensor::from(sample, std::vector<double>(x.data().begin() + i * per, x.data().begin() + (i + 1) * per),
                            x.dtype());
    Tensor a = apply_pipeline(s, pipe, rng);
    Tensor b = apply_pipeline(s, pipe, rng);
    std::copy(a.data().begin(), a.data().end(), va.begin() + i * per);
    std::copy(b.data().begin(), b.data().end(), vb.begin() + i * per);
  }
  return {Tensor::from(x.shape(), std::move(va), x.dtype()), Tensor::from(x.shape(), std::move(vb), x.dtype())};
}

SslObjective ssl_objective_from_name(const std::string &name) {
  if (name == "vicreg") return SslObjective::vicreg;
  if (name == "barlow" || name == "barlow_twins") return SslObjective::barlow;
  throw ConfigError("unknown SSL objective '" + name + "'");
}

SslResult ssl_loss(const Medformer &model, const std::vector<SslGroup> &groups, const SslOptions &opt, Rng &rng,
                   Rng *dropout_rng) {
  if (groups.empty()) throw BatchError("ssl_loss: no samples");
  std::vector<Tensor> e1, e2;
  for (const auto &g : groups) {
    if (g.tdef == nullptr) throw ContractError("ssl_loss: group without a task tdef");
    if (g.x.rank() != g.tdef->input_shape.size() + 1) {
      throw InputError("ssl_loss expects a batch of " + shape_str(g.tdef->input_shape) + " samples, got " +
                       shape_str(g.x.shape()));
    }
    auto [a, b] = augmented_pair(g.x, g.tdef->input_shape.size(), opt.pipeline, rng);
    e1.push_back(model.embed_ssl(a, *g.tdef, dropout_rng));
    e2.push_back(model.embed_ssl(b, *g.tdef, dropout_rng));
  }
  Tensor z1 = e1.size() == 1 ? e1[0] : ops::concat(e1, 0);
  Tensor z2 = e2.size() == 1 ? e2[0] : ops::concat(e2, 0);
  SslResult r;
  if (opt.objective == SslObjective::vicreg) {
    r.terms = vicreg_loss(z1, z2, opt.vicreg);
    r.loss = r.terms.total;
  } else {
    r.loss = barlow_twins_loss(z1, z2, opt.barlow_lambda);
  }
  return r;
}

}  // namespace mdf

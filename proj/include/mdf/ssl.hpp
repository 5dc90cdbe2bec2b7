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
#ifndef MDF_SSL_HPP_
#define MDF_SSL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "mdf/augment.hpp"
#include "mdf/medformer.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

struct VicregWeights {
  double inv_mse = 25.0;
  double inv_cos = 1.0;
  double var_coeff = 25.0;
  double cov_coeff = 1.0;
  double gamma = 1.0;
  /// Added to the column variance before the square root.
  double var_eps = 1e-4;
};

struct VicregTerms {
  Tensor total;
  Tensor mse;         // mean squared difference
  Tensor cosine;      // mean(1 - cos(e1_i, e2_i))
  Tensor invariance;  // inv_mse * mse + inv_cos * cosine
  Tensor variance;    // mean over dims of relu(gamma - std), averaged over views
  Tensor covariance;  // mean squared off-diagonal covariance, averaged over views
};

/// e1, e2 [B, dz] with B >= 2 (BatchError otherwise). Column std and
/// covariance use the unbiased (B - 1) estimator.
/// total = invariance + var_coeff * variance + cov_coeff * covariance.
VicregTerms vicreg_loss(const Tensor &e1, const Tensor &e2, const VicregWeights &w = {});

/// Columns standardized with the batch mean and biased std; C = z1n^T z2n / B;
/// loss = sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2. A constant
/// column raises BatchError.
Tensor barlow_twins_loss(const Tensor &z1, const Tensor &z2, double lambda = 0.005);
/// The cross-correlation matrix used above (no gradient).
Tensor cross_correlation(const Tensor &z1, const Tensor &z2);

/// Two independent pipeline draws per sample of a batch [N, ...] whose
/// samples have rank `sample_rank`.
std::pair<Tensor, Tensor> augmented_pair(const Tensor &x, std::size_t sample_rank, const AugPipeline &pipe, Rng &rng);

enum class SslObjective { vicreg, barlow };
SslObjective ssl_objective_from_name(const std::string &name);

struct SslGroup {
  Tensor x;  // [B_g, ...] unlabeled samples of one input domain
  const TaskDef *tdef = nullptr;
};

struct SslOptions {
  SslObjective objective = SslObjective::vicreg;
  VicregWeights vicreg;
  double barlow_lambda = 0.005;
  AugPipeline pipeline = AugPipeline::standard();
};

struct SslResult {
  Tensor loss;
  VicregTerms terms;  // populated for VICReg
};

/// Builds two views of every sample, embeds each group with its own domain
/// latents (trunk, mean pool, expander), concatenates the groups and
/// applies the objective. Records on the active tape.
SslResult ssl_loss(const Medformer &model, const std::vector<SslGroup> &groups, const SslOptions &opt, Rng &rng,
                   Rng *dropout_rng = nullptr);

}  // namespace mdf

#endif  // MDF_SSL_HPP_

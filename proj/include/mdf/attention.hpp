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
#ifndef MDF_ATTENTION_HPP_
#define MDF_ATTENTION_HPP_

#include <string>

#include "mdf/nn.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

struct BlockConfig {
  std::size_t hidden_dim = 128;
  std::size_t num_heads = 4;
  double mlp_ratio = 4.0;
  double dropout = 0.0;

  /// Throws ConfigError on d % h != 0, r < 1 or dropout outside [0,1).
  void validate() const;
};

/// softmax(Q K^T / sqrt(d_k)) over the key axis. Q [..., nq, dk], K [..., nk, dk].
Tensor attention_weights(const Tensor &q, const Tensor &k);
/// attention_weights(q, k) @ v with V [..., nk, dv].
Tensor scaled_dot_attention(const Tensor &q, const Tensor &k, const Tensor &v);

struct AttentionParams {
  Linear q, k, v, o;

  /// q/k/v Xavier-uniform, output projection zero.
  static AttentionParams init(std::size_t d, Rng &rng, DType dt = DType::f64);
  void collect(const std::string &prefix, ParamList &out) const;
};

/// x [..., nq, d] attends over ctx [..., nk, d] (ctx may have fewer leading
/// axes than x, e.g. latents shared by the whole batch).
Tensor multi_head_attention(const Tensor &x, const Tensor &ctx, std::size_t num_heads, const AttentionParams &p);

struct BlockParams {
  bool has_cross = false;
  LayerNorm norm_cross;
  LayerNorm norm_ctx;
  AttentionParams cross;
  LayerNorm norm_self;
  AttentionParams self;
  LayerNorm norm_mlp;
  Linear fc1;
  Linear fc2;  // zero-initialized

  static BlockParams init(const BlockConfig &cfg, bool with_cross, Rng &rng, DType dt = DType::f64);
  void collect(const std::string &prefix, ParamList &out) const;
};

/// Pre-norm block: optional cross-attention of x onto `latents`, then
/// self-attention, then a GELU MLP, each as a residual update. `latents`
/// must be defined exactly when the block was built with cross-attention.
/// `rng` enables dropout (training); pass null for evaluation.
Tensor transformer_block(const Tensor &x, const Tensor &latents, const BlockConfig &cfg, const BlockParams &p,
                         Rng *rng = nullptr);

}  // namespace mdf

#endif  // MDF_ATTENTION_HPP_

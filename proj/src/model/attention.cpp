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
#include "mdf/attention.hpp"

#include <cmath>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

void BlockConfig::validate() const {
  if (hidden_dim == 0 || num_heads == 0 || hidden_dim % num_heads != 0) {
    throw ConfigError("hidden_dim " + std::to_string(hidden_dim) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (!(mlp_ratio >= 1.0)) throw ConfigError("mlp_ratio must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

Tensor attention_weights(const Tensor &q, const Tensor &k) {
  if (q.rank() < 2 || k.rank() < 2 || q.shape().back() != k.shape().back()) {
    throw DimensionError("attention: Q " + shape_str(q.shape()) + " and K " + shape_str(k.shape()) +
                         " must share the last dim");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.shape().back()));
  return ops::softmax(ops::scale(ops::matmul(q, ops::transpose(k)), scale), -1);
}

Tensor scaled_dot_attention(const Tensor &q, const Tensor &k, const Tensor &v) {
  if (v.rank() < 2 || k.dim(-2) != v.dim(-2)) {
    throw DimensionError("attention: K " + shape_str(k.shape()) + " and V " + shape_str(v.shape()) +
                         " must share the row count");
  }
  return ops::matmul(attention_weights(q, k), v);
}

AttentionParams AttentionParams::init(std::size_t d, Rng &rng, DType dt) {
  AttentionParams p;
  p.q = Linear::init(d, d, rng, dt);
  p.k = Linear::init(d, d, rng, dt);
  p.v = Linear::init(d, d, rng, dt);
  p.o = Linear::zeros(d, d, dt);
  return p;
}

void AttentionParams::collect(const std::string &prefix, ParamList &out) const {
  q.collect(prefix + ".q", out);
  k.collect(prefix + ".k", out);
  v.collect(prefix + ".v", out);
  o.collect(prefix + ".o", out);
}

namespace {

// [..., n, d] -> [..., h, n, d/h]
Tensor split_heads(const Tensor &x, std::size_t h) {
  Shape s = x.shape();
  const std::size_t d = s.back();
  Shape split(s.begin(), s.end() - 1);
  split.push_back(h);
  split.push_back(d / h);
  const std::size_t r = split.size();
  std::vector<std::size_t> perm;
  for (std::size_t a = 0; a + 3 < r; ++a) perm.push_back(a);
  perm.push_back(r - 2);
  perm.push_back(r - 3);
  perm.push_back(r - 1);
  return ops::permute(ops::reshape(x, split), perm);
}

// [..., h, n, dh] -> [..., n, h*dh]
Tensor merge_heads(const Tensor &x) {
  const Shape &s = x.shape();
  const std::size_t r = s.size();
  std::vector<std::size_t> perm;
  for (std::size_t a = 0; a + 3 < r; ++a) perm.push_back(a);
  perm.push_back(r - 2);
  perm.push_back(r - 3);
  perm.push_back(r - 1);
  Tensor t = ops::permute(x, perm);
  Shape merged(s.begin(), s.end() - 3);
  merged.push_back(s[r - 2]);
  merged.push_back(s[r - 3] * s[r - 1]);
  return ops::reshape(t, merged);
}

}  // namespace

Tensor multi_head_attention(const Tensor &x, const Tensor &ctx, std::size_t num_heads, const AttentionParams &p) {
  const std::size_t d = x.shape().back();
  if (num_heads == 0 || d % num_heads != 0) {
    throw ConfigError("hidden_dim " + std::to_string(d) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (ctx.shape().back() != d) {
    throw DimensionError("attention context " + shape_str(ctx.shape()) + " does not match width " + std::to_string(d));
  }
  Tensor q = split_heads(p.q(x), num_heads);
  Tensor k = split_heads(p.k(ctx), num_heads);
  Tensor v = split_heads(p.v(ctx), num_heads);
  return p.o(merge_heads(scaled_dot_attention(q, k, v)));
}

BlockParams BlockParams::init(const BlockConfig &cfg, bool with_cross, Rng &rng, DType dt) {
  cfg.validate();
  const std::size_t d = cfg.hidden_dim;
  const auto hidden = static_cast<std::size_t>(std::lround(cfg.mlp_ratio * static_cast<double>(d)));
  BlockParams p;
  p.has_cross = with_cross;
  if (with_cross) {
    p.norm_cross = LayerNorm::init(d, dt);
    p.norm_ctx = LayerNorm::init(d, dt);
    p.cross = AttentionParams::init(d, rng, dt);
  }
  p.norm_self = LayerNorm::init(d, dt);
  p.self = AttentionParams::init(d, rng, dt);
  p.norm_mlp = LayerNorm::init(d, dt);
  p.fc1 = Linear::init(d, hidden, rng, dt);
  p.fc2 = Linear::zeros(hidden, d, dt);
  return p;
}

void BlockParams::collect(const std::string &prefix, ParamList &out) const {
  if (has_cross) {
    norm_cross.collect(prefix + ".norm_cross", out);
    norm_ctx.collect(prefix + ".norm_ctx", out);
    cross.collect(prefix + ".cross", out);
  }
  norm_self.collect(prefix + ".norm_self", out);
  self.collect(prefix + ".self", out);
  norm_mlp.collect(prefix + ".norm_mlp", out);
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

Tensor transformer_block(const Tensor &x, const Tensor &latents, const BlockConfig &cfg, const BlockParams &p,
                         Rng *rng) {
  if (p.has_cross != latents.defined()) {
    throw ContractError(p.has_cross ? "cross-attention block called without latents"
                                    : "latents passed to a block without cross-attention");
  }
  Tensor h = x;
  if (p.has_cross) {
    Tensor upd = multi_head_attention(p.norm_cross(h), p.norm_ctx(latents), cfg.num_heads, p.cross);
    h = ops::add(h, dropout(upd, cfg.dropout, rng));
  }
  Tensor n = p.norm_self(h);
  h = ops::add(h, dropout(multi_head_attention(n, n, cfg.num_heads, p.self), cfg.dropout, rng));
  Tensor m = p.fc2(ops::gelu(p.fc1(p.norm_mlp(h))));
  return ops::add(h, dropout(m, cfg.dropout, rng));
}

}  // namespace mdf

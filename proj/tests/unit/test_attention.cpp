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
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "mdf/attention.hpp"
#include "mdf/error.hpp"
#include "mdf/gradcheck.hpp"
#include "mdf/ops.hpp"
#include "support/oracles.hpp"

using namespace mdf;

namespace {

Tensor permute_rows(const Tensor &x, const std::vector<std::size_t> &perm) {
  const std::size_t n = x.dim(-2), d = x.dim(-1);
  const std::size_t outer = x.numel() / (n * d);
  std::vector<double> out(x.numel());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(x.data().begin() + (o * n + perm[i]) * d, d, out.begin() + (o * n + i) * d);
    }
  }
  return Tensor::from(x.shape(), std::move(out));
}

// Fills every parameter with small random values, so zero-initialized
// projections do not hide the attention paths.
void randomize(const ParamList &params, Rng &rng) {
  for (const auto &p : params) {
    Tensor t = p.tensor;
    for (auto &v : t.mutable_data()) v = rng.normal(0.0, 0.3);
  }
}

}  // namespace

TEST_SUITE("attention") {
  TEST_CASE("single key returns the value row") {
    Rng rng(1);
    Tensor q = randn({3, 4}, rng), k = randn({1, 4}, rng), v = randn({1, 2}, rng);
    Tensor o = scaled_dot_attention(q, k, v);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(o.at({i, c}) - v.at({0, c})) < 1e-15);
    }
  }

  TEST_CASE("identical keys average the values") {
    Rng rng(2);
    Tensor q = randn({2, 4}, rng);
    Tensor k1 = randn({1, 4}, rng);
    Tensor k = ops::concat({k1, k1}, 0);
    Tensor v = randn({2, 3}, rng);
    Tensor o = scaled_dot_attention(q, k, v);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(o.at({i, c}) - 0.5 * (v.at({0, c}) + v.at({1, c}))) < 1e-14);
    }
  }

  TEST_CASE("matches explicit loop oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      Tensor q = randn({3, 4}, rng), k = randn({3, 4}, rng), v = randn({3, 2}, rng);
      Tensor o = scaled_dot_attention(q, k, v);
      auto ref = test::attention_oracle(q.data(), k.data(), v.data(), 3, 3, 4, 2);
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(o.data()[i] - ref[i]) <= 1e-10);
    }
  }

  TEST_CASE("attention rows are convex weights") {
    Rng rng(4);
    Tensor w = attention_weights(randn({2, 5, 8}, rng, 3.0), randn({2, 7, 8}, rng, 3.0));
    for (std::size_t r = 0; r < 10; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        CHECK(w.data()[r * 7 + j] >= 0.0);
        s += w.data()[r * 7 + j];
      }
      CHECK(std::abs(s - 1.0) <= 1e-6);
    }
  }

  TEST_CASE("one head with identity projections reduces to plain attention") {
    const std::size_t d = 4;
    Tensor eye = Tensor::zeros({d, d});
    for (std::size_t i = 0; i < d; ++i) eye.mutable_data()[i * d + i] = 1.0;
    AttentionParams p;
    p.q = p.k = p.v = p.o = Linear{eye, Tensor::zeros({d})};
    Rng rng(5);
    Tensor x = randn({3, d}, rng);
    Tensor ctx = randn({1, d}, rng);
    Tensor o = multi_head_attention(x, ctx, 1, p);
    Tensor ref = scaled_dot_attention(x, ctx, ctx);
    for (std::size_t i = 0; i < o.numel(); ++i) CHECK(std::abs(o.data()[i] - ref.data()[i]) < 1e-14);
  }

  TEST_CASE("multi-head shapes and config errors") {
    Rng rng(6);
    AttentionParams p = AttentionParams::init(128, rng);
    Tensor o = multi_head_attention(Tensor::zeros({49, 128}), Tensor::zeros({96, 128}), 4, p);
    CHECK(o.shape() == Shape{49, 128});
    CHECK_THROWS_AS(multi_head_attention(Tensor::zeros({2, 6}), Tensor::zeros({2, 6}), 4, AttentionParams::init(6, rng)),
                    ConfigError);
    CHECK_THROWS_AS((BlockConfig{6, 4, 4.0, 0.0}.validate()), ConfigError);
  }

  TEST_CASE("multi-head gradients match finite differences") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      AttentionParams p = AttentionParams::init(6, rng);
      ParamList list;
      p.collect("a", list);
      randomize(list, rng);
      Tensor x = randn({2, 4, 6}, rng);
      Tensor ctx = randn({3, 6}, rng);
      std::vector<Tensor> inputs = {x, ctx};
      for (const auto &e : list) inputs.push_back(e.tensor);
      auto res = grad_check(
          [](const std::vector<Tensor> &in) {
            AttentionParams q;
            q.q = {in[2], in[3]};
            q.k = {in[4], in[5]};
            q.v = {in[6], in[7]};
            q.o = {in[8], in[9]};
            return ops::sum(ops::square(multi_head_attention(in[0], in[1], 2, q)));
          },
          inputs);
      CHECK(res.max_rel_err <= 1e-4);
    }
  }

  TEST_CASE("zero weights leave the block an identity") {
    BlockConfig cfg{8, 2, 2.0, 0.0};
    Rng rng(8);
    BlockParams p = BlockParams::init(cfg, true, rng);
    ParamList list;
    p.collect("blk", list);
    for (const auto &e : list) {
      Tensor t = e.tensor;
      std::fill(t.mutable_data().begin(), t.mutable_data().end(), 0.0);
    }
    Tensor x = randn({5, 8}, rng);
    Tensor y = transformer_block(x, randn({3, 8}, rng), cfg, p);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
  }

  TEST_CASE("zero-initialized output projections give identity at init") {
    BlockConfig cfg{16, 4, 4.0, 0.0};
    Rng rng(9);
    BlockParams p = BlockParams::init(cfg, true, rng);
    Tensor x = randn({2, 6, 16}, rng);
    Tensor y = transformer_block(x, randn({4, 16}, rng), cfg, p);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
  }

  TEST_CASE("block shape with latents") {
    BlockConfig cfg{128, 4, 4.0, 0.0};
    Rng rng(10);
    BlockParams p = BlockParams::init(cfg, true, rng);
    CHECK(transformer_block(randn({49, 128}, rng), randn({96, 128}, rng), cfg, p).shape() == Shape{49, 128});
    CHECK_THROWS_AS(transformer_block(Tensor::zeros({2, 128}), Tensor(), cfg, p), ContractError);
  }

  TEST_CASE("self-attention block is permutation equivariant") {
    BlockConfig cfg{8, 2, 2.0, 0.0};
    Rng rng(11);
    BlockParams p = BlockParams::init(cfg, false, rng);
    ParamList list;
    p.collect("blk", list);
    randomize(list, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Tensor x = randn({6, 8}, rng);
      std::vector<std::size_t> perm(6);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      Tensor a = permute_rows(transformer_block(x, Tensor(), cfg, p), perm);
      Tensor b = transformer_block(permute_rows(x, perm), Tensor(), cfg, p);
      for (std::size_t i = 0; i < a.numel(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-6);
    }
  }

  TEST_CASE("cross-attention is invariant to latent order") {
    BlockConfig cfg{8, 2, 2.0, 0.0};
    Rng rng(12);
    BlockParams p = BlockParams::init(cfg, true, rng);
    ParamList list;
    p.collect("blk", list);
    randomize(list, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Tensor x = randn({2, 5, 8}, rng);
      Tensor lat = randn({6, 8}, rng);
      std::vector<std::size_t> perm(6);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      Tensor a = transformer_block(x, lat, cfg, p);
      Tensor b = transformer_block(x, permute_rows(lat, perm), cfg, p);
      for (std::size_t i = 0; i < a.numel(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-6);
    }
  }

  TEST_CASE("block gradients match finite differences") {
    BlockConfig cfg{4, 2, 2.0, 0.0};
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
      BlockParams p = BlockParams::init(cfg, true, rng);
      ParamList list;
      p.collect("blk", list);
      randomize(list, rng);
      std::vector<Tensor> inputs = {randn({3, 4}, rng), randn({2, 4}, rng)};
      for (const auto &e : list) inputs.push_back(e.tensor);
      auto res = grad_check(
          [&](const std::vector<Tensor> &in) {
            ParamList l2 = list;
            BlockParams q = p;
            std::size_t i = 2;
            for (Tensor *t : {&q.norm_cross.gamma, &q.norm_cross.beta, &q.norm_ctx.gamma, &q.norm_ctx.beta,
                              &q.cross.q.w, &q.cross.q.b, &q.cross.k.w, &q.cross.k.b, &q.cross.v.w, &q.cross.v.b,
                              &q.cross.o.w, &q.cross.o.b, &q.norm_self.gamma, &q.norm_self.beta, &q.self.q.w,
                              &q.self.q.b, &q.self.k.w, &q.self.k.b, &q.self.v.w, &q.self.v.b, &q.self.o.w,
                              &q.self.o.b, &q.norm_mlp.gamma, &q.norm_mlp.beta, &q.fc1.w, &q.fc1.b, &q.fc2.w,
                              &q.fc2.b}) {
              *t = in[i++];
            }
            return ops::sum(ops::square(transformer_block(in[0], in[1], cfg, q)));
          },
          inputs);
      CHECK(res.max_rel_err <= 1e-4);
    }
  }
}

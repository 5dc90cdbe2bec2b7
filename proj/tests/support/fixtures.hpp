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
#ifndef MDF_TEST_FIXTURES_HPP_
#define MDF_TEST_FIXTURES_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "mdf/medformer.hpp"
#include "mdf/ops.hpp"
#include "mdf/optim.hpp"
#include "mdf/random.hpp"
#include "support/oracles.hpp"

namespace mdf::test {

inline LatentsConfig demo_latents() {
  LatentsConfig c;
  c[LatentCategory::dimension] = {"2d_latent", "3d_latent"};
  c[LatentCategory::modality] = {"chest_xray", "ct_scan", "microscopic"};
  c[LatentCategory::body_part] = {"chest", "abdominal", "tissue"};
  c[LatentCategory::task] = {"a_binary", "b_multiclass", "c_volume", "d_multilabel", "e_ordinal"};
  return c;
}

inline TaskDef make_task(const std::string &name, std::size_t dims, TaskType type, std::size_t k, Shape shape,
                   const std::string &mod, const std::string &body) {
  TaskDef t;
  t.name = name;
  t.dims = dims;
  t.type = type;
  t.num_classes = k;
  t.input_shape = std::move(shape);
  t.modality = mod;
  t.body_part = body;
  t.dim_latent = dims == 2 ? "2d_latent" : "3d_latent";
  t.modality_latent = mod;
  t.body_latent = body;
  t.task_latent = name;
  t.head_id = name;
  return t;
}

inline std::vector<TaskDef> demo_tasks() {
  return {make_task("a_binary", 2, TaskType::binary, 2, {1, 8, 8}, "chest_xray", "chest"),
          make_task("b_multiclass", 2, TaskType::single_label, 4, {3, 8, 8}, "microscopic", "tissue"),
          make_task("c_volume", 3, TaskType::binary, 2, {1, 8, 8, 8}, "ct_scan", "abdominal"),
          make_task("d_multilabel", 2, TaskType::multi_label, 3, {1, 8, 8}, "chest_xray", "chest"),
          make_task("e_ordinal", 2, TaskType::ordinal, 5, {3, 8, 8}, "microscopic", "tissue")};
}

inline ModelConfig tiny(DType dt = DType::f64) {
  ModelConfig c;
  c.hidden_dim = 12;
  c.main_layers = 1;
  c.adapt_in_layers = 1;
  c.adapt_out_layers = 1;
  c.num_heads = 2;
  c.patch_size = 4;
  c.latent_tokens = 3;
  c.latent_dim = 6;
  c.expander_widths = {16, 8};
  c.dtype = dt;
  return c;
}

inline void randomize(Medformer &m, Rng &rng, double sd = 0.2) {
  for (auto &p : m.parameters()) {
    Tensor t = p.tensor;
    for (auto &v : t.mutable_data()) v = round_to(t.dtype(), v + rng.normal(0.0, sd));
  }
}

inline bool any_nonzero(const std::vector<double> &g) {
  return std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; });
}

/// Recording SGD: keeps the gradient it applied to each parameter.
class RecordingSgd : public Optimizer {
 public:
  void step(const ParamList &params, double lr) override {
    for (const auto &p : params) {
      applied[p.name] = p.tensor.grad();
      Tensor t = p.tensor;
      auto w = t.mutable_data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * applied[p.name][i];
    }
  }
  std::map<std::string, std::vector<double>> applied;
};

/// Two-layer linear net on a fixed batch: mean((X W1 W2 - Y)^2).
struct LinearFixture {
  Tensor x, y, w1, w2;
  LinearFixture() {
    Rng rng(81);
    x = randn({6, 4}, rng);
    y = randn({6, 2}, rng);
    w1 = randn({4, 3}, rng, 0.5).set_requires_grad();
    w2 = randn({3, 2}, rng, 0.5).set_requires_grad();
  }
  Tensor loss() const { return ops::mean(ops::square(ops::sub(ops::matmul(ops::matmul(x, w1), w2), y))); }
};

/// d/dW of mean((X W1 W2 - Y)^2), written out by hand.
inline void linear_grads(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &w1,
                  const std::vector<double> &w2, std::vector<double> &g1, std::vector<double> &g2) {
  auto h = matmul_oracle(x, w1, 6, 4, 3);
  auto out = matmul_oracle(h, w2, 6, 3, 2);
  std::vector<double> d(12);
  for (std::size_t i = 0; i < 12; ++i) d[i] = 2.0 * (out[i] - y[i]) / 12.0;
  g2.assign(6, 0.0);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t r = 0; r < 6; ++r) g2[a * 2 + b] += h[r * 3 + a] * d[r * 2 + b];
  std::vector<double> dh(18, 0.0);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 2; ++b) dh[r * 3 + a] += d[r * 2 + b] * w2[a * 2 + b];
  g1.assign(12, 0.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t r = 0; r < 6; ++r) g1[i * 3 + a] += x[r * 4 + i] * dh[r * 3 + a];
}

}  // namespace mdf::test

#endif  // MDF_TEST_FIXTURES_HPP_

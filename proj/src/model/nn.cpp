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
#include "mdf/nn.hpp"

#include <cmath>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

Tensor make_param(Tensor values) {
  Tensor p = values.detach();
  p.set_requires_grad(true);
  return p;
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng &rng, DType dt) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return rand_uniform({fan_in, fan_out}, rng, -a, a, dt);
}

Linear Linear::init(std::size_t in, std::size_t out, Rng &rng, DType dt) {
  return {make_param(xavier_uniform(in, out, rng, dt)), make_param(Tensor::zeros({out}, dt))};
}

Linear Linear::zeros(std::size_t in, std::size_t out, DType dt) {
  return {make_param(Tensor::zeros({in, out}, dt)), make_param(Tensor::zeros({out}, dt))};
}

Tensor Linear::operator()(const Tensor &x) const { return ops::linear(x, w, b); }

void Linear::collect(const std::string &prefix, ParamList &out) const {
  out.push_back({prefix + ".w", w});
  out.push_back({prefix + ".b", b});
}

LayerNorm LayerNorm::init(std::size_t d, DType dt) {
  return {make_param(Tensor::ones({d}, dt)), make_param(Tensor::zeros({d}, dt)), 1e-5};
}

Tensor LayerNorm::operator()(const Tensor &x) const { return ops::layer_norm(x, gamma, beta, eps); }

void LayerNorm::collect(const std::string &prefix, ParamList &out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

Mlp Mlp::init(std::size_t in, const std::vector<std::size_t> &widths, Rng &rng, DType dt) {
  Mlp m;
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("MLP widths must be positive");
    m.layers.push_back(Linear::init(in, w, rng, dt));
    in = w;
  }
  return m;
}

Tensor Mlp::operator()(const Tensor &x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (i + 1 < layers.size()) h = ops::relu(h);
  }
  return h;
}

void Mlp::collect(const std::string &prefix, ParamList &out) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(prefix + "." + std::to_string(i), out);
}

Tensor dropout(const Tensor &x, double p, Rng *rng) {
  if (p < 0.0 || p >= 1.0) throw ParameterError("dropout probability must be in [0, 1)");
  if (p == 0.0 || rng == nullptr) return x;
  std::vector<double> mask(x.numel());
  const double keep = 1.0 / (1.0 - p);
  for (auto &m : mask) m = rng->bernoulli(p) ? 0.0 : keep;
  return ops::mul(x, Tensor::from(x.shape(), std::move(mask), x.dtype()));
}

}  // namespace mdf

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
#ifndef MDF_NN_HPP_
#define MDF_NN_HPP_

#include <string>
#include <vector>

#include "mdf/random.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedTensor>;

/// Trainable leaf initialized from `values`.
Tensor make_param(Tensor values);

/// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng &rng, DType dt = DType::f64);

struct Linear {
  Tensor w;  // [in, out]
  Tensor b;  // [out]

  static Linear init(std::size_t in, std::size_t out, Rng &rng, DType dt = DType::f64);
  static Linear zeros(std::size_t in, std::size_t out, DType dt = DType::f64);
  std::size_t in_dim() const { return w.dim(0); }
  std::size_t out_dim() const { return w.dim(1); }
  Tensor operator()(const Tensor &x) const;
  void collect(const std::string &prefix, ParamList &out) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;
  double eps = 1e-5;

  static LayerNorm init(std::size_t d, DType dt = DType::f64);
  Tensor operator()(const Tensor &x) const;
  void collect(const std::string &prefix, ParamList &out) const;
};

/// Linear layers with ReLU between them (none after the last).
struct Mlp {
  std::vector<Linear> layers;

  static Mlp init(std::size_t in, const std::vector<std::size_t> &widths, Rng &rng, DType dt = DType::f64);
  bool empty() const { return layers.empty(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  Tensor operator()(const Tensor &x) const;
  void collect(const std::string &prefix, ParamList &out) const;
};

/// Multiplies by a Bernoulli(1-p) mask scaled by 1/(1-p). Identity when p
/// is 0 or rng is null.
Tensor dropout(const Tensor &x, double p, Rng *rng);

}  // namespace mdf

#endif  // MDF_NN_HPP_

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
#ifndef MDF_OPS_HPP_
#define MDF_OPS_HPP_

#include <cstddef>
#include <vector>

#include "mdf/tensor.hpp"

// Differentiable primitives. Every op checks its output for NaN/Inf and
// throws NumericError; binary elementwise ops broadcast over trailing
// dimensions. Reductions accumulate in double.
namespace mdf::ops {

Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor div(const Tensor &a, const Tensor &b);

Tensor scale(const Tensor &x, double s);
Tensor add_scalar(const Tensor &x, double s);
Tensor neg(const Tensor &x);
Tensor exp(const Tensor &x);
Tensor log(const Tensor &x);
Tensor sqrt(const Tensor &x);
Tensor tanh(const Tensor &x);
Tensor sigmoid(const Tensor &x);
Tensor relu(const Tensor &x);
/// tanh approximation of GELU.
Tensor gelu(const Tensor &x);
Tensor pow(const Tensor &x, double exponent);
Tensor square(const Tensor &x);

/// Batched matrix product [..., m, k] x [..., k, n] -> [..., m, n].
Tensor matmul(const Tensor &a, const Tensor &b);
/// x @ w + b for x [..., in], w [in, out], b [out] (b may be undefined).
Tensor linear(const Tensor &x, const Tensor &w, const Tensor &b);

Tensor reshape(const Tensor &x, const Shape &shape);
Tensor permute(const Tensor &x, const std::vector<std::size_t> &perm);
/// Swaps the last two axes.
Tensor transpose(const Tensor &x);
Tensor concat(const std::vector<Tensor> &parts, int axis);
Tensor slice(const Tensor &x, int axis, std::size_t start, std::size_t length);

Tensor sum(const Tensor &x);
Tensor mean(const Tensor &x);
Tensor sum(const Tensor &x, int axis, bool keepdim = false);
Tensor mean(const Tensor &x, int axis, bool keepdim = false);

Tensor softmax(const Tensor &x, int axis);
Tensor log_softmax(const Tensor &x, int axis);
/// Normalizes over the last axis, then applies gamma * y + beta.
Tensor layer_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, double eps);

/// Elementwise logistic loss max(z,0) - z*y + log(1+exp(-|z|)); the gradient
/// flows to the logits only.
Tensor bce_with_logits(const Tensor &logits, const Tensor &targets);

/// Normalizes a possibly negative axis against `rank`.
std::size_t normalize_axis(int axis, std::size_t rank);
Shape broadcast_shapes(const Shape &a, const Shape &b);

}  // namespace mdf::ops

#endif  // MDF_OPS_HPP_

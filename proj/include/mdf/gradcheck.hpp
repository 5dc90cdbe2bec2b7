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
#ifndef MDF_GRADCHECK_HPP_
#define MDF_GRADCHECK_HPP_

#include <functional>
#include <vector>

#include "mdf/tensor.hpp"

namespace mdf {

using ScalarFn = std::function<double(const Tensor &)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every element.
/// `f` is evaluated without recording.
Tensor finite_diff_grad(const ScalarFn &f, const Tensor &x, double h);

/// max|a - b| / max(max|a|, max|b|, floor): the worst deviation relative to
/// the scale of the gradient tensor.
double max_rel_error(const std::vector<double> &a, const std::vector<double> &b, double floor = 1e-6);

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the tape gradient of `loss(inputs)` against finite differences
/// on each input in turn; max_rel_err is the worst per-input max_rel_error.
GradCheckResult grad_check(const std::function<Tensor(const std::vector<Tensor> &)> &loss,
                           std::vector<Tensor> inputs, double h = 1e-3);

}  // namespace mdf

#endif  // MDF_GRADCHECK_HPP_

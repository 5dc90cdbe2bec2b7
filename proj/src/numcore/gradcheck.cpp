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
#include "mdf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mdf/error.hpp"

namespace mdf {

Tensor finite_diff_grad(const ScalarFn &f, const Tensor &x, double h) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_grad: h must be positive");
  NoGradScope no_grad;
  Tensor probe = x.detach();
  auto values = probe.mutable_data();
  std::vector<double> grad(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    values[i] = orig + h;
    const double fp = f(probe);
    values[i] = orig - h;
    const double fm = f(probe);
    values[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return Tensor::from(x.shape(), std::move(grad), DType::f64);
}

double max_rel_error(const std::vector<double> &a, const std::vector<double> &b, double floor) {
  if (a.size() != b.size()) throw DimensionError("max_rel_error: size mismatch");
  double diff = 0.0, scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

GradCheckResult grad_check(const std::function<Tensor(const std::vector<Tensor> &)> &loss,
                           std::vector<Tensor> inputs, double h) {
  for (auto &t : inputs) {
    t = t.detach();
    t.set_requires_grad(true);
  }
  {
    GradTape tape;
    TapeScope scope(tape);
    Tensor l = loss(inputs);
    tape.backward(l);
  }
  GradCheckResult res;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto analytic = inputs[k].grad();
    const Tensor numeric = finite_diff_grad(
        [&](const Tensor &probe) {
          std::vector<Tensor> args = inputs;
          args[k] = probe;
          return loss(args).item();
        },
        inputs[k], h);
    res.max_rel_err = std::max(res.max_rel_err, max_rel_error(analytic, {numeric.data().begin(), numeric.data().end()}));
    res.analytic.insert(res.analytic.end(), analytic.begin(), analytic.end());
    res.numeric.insert(res.numeric.end(), numeric.data().begin(), numeric.data().end());
  }
  return res;
}

}  // namespace mdf

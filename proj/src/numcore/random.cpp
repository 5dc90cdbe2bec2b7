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
#include "mdf/random.hpp"

namespace mdf {

Tensor randn(const Shape &shape, Rng &rng, double stddev, DType dt) {
  std::vector<double> v(shape_numel(shape));
  for (auto &x : v) x = rng.normal(0.0, stddev);
  return Tensor::from(shape, std::move(v), dt);
}

Tensor rand_uniform(const Shape &shape, Rng &rng, double lo, double hi, DType dt) {
  std::vector<double> v(shape_numel(shape));
  for (auto &x : v) x = rng.uniform(lo, hi);
  return Tensor::from(shape, std::move(v), dt);
}

}  // namespace mdf

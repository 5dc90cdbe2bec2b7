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
#ifndef MDF_AUGMENT_HPP_
#define MDF_AUGMENT_HPP_

#include <functional>
#include <utility>
#include <vector>

#include "mdf/random.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

// Samples are [C, H, W] or [C, D, H, W]; spatial axes are numbered from 0
// after the channel axis.

/// Reverses one spatial axis.
Tensor flip(const Tensor &x, std::size_t axis);
/// Rotates by k * 90 degrees in the plane of spatial axes (a, b); the plane
/// must be square.
Tensor rot90(const Tensor &x, int k, std::size_t a, std::size_t b);
/// x + N(0, sigma^2), clamped to [0, 1].
Tensor intensity_jitter(const Tensor &x, double sigma, Rng &rng);

enum class RandAugOp { identity, hflip, vflip, rot90, brightness, contrast, gamma, translate };
inline constexpr int kRandAugOps = 8;
/// One RandAugment op at magnitude m in [0, 1]; `sign` picks the direction
/// of signed ops.
Tensor rand_augment_op(const Tensor &x, RandAugOp op, double m, bool sign, Rng &rng);
/// N ops drawn uniformly with replacement at magnitude M / 10.
Tensor rand_augment(const Tensor &x, int n, int magnitude, Rng &rng);

struct AugStep {
  enum class Kind { hflip, vflip, flip_axis, rot90, jitter, rand_augment };
  Kind kind = Kind::hflip;
  double p = 0.5;      // application probability (flips, rot90, jitter)
  int k = -1;          // rot90 quarter turns; -1 draws from {0,1,2,3}
  std::size_t axis = 0;    // flip_axis
  std::size_t plane_a = 0; // rot90 plane; 3D defaults pick a random plane
  std::size_t plane_b = 1;
  bool random_plane = true;
  double sigma = 0.05;  // jitter
  int n = 2;            // RandAugment N
  int magnitude = 8;    // RandAugment M
};

struct AugPipeline {
  std::vector<AugStep> steps;

  /// Flips, random quarter turns, light jitter.
  static AugPipeline standard();
  /// RandAugment(N=2, M=8).
  static AugPipeline randaugment(int n = 2, int magnitude = 8);
  static AugPipeline identity() { return {}; }
};

/// Applies the steps in order; the output stays in [0, 1].
Tensor apply_pipeline(const Tensor &x, const AugPipeline &pipe, Rng &rng);

/// Elementwise mean of K samples and of their label vectors.
std::pair<Tensor, Tensor> sum_augment(const std::vector<Tensor> &xs, const std::vector<Tensor> &ys);

/// Batch form: sample i is averaged with K-1 other rows drawn uniformly
/// from the batch (without replacement when possible). x [B, ...], y [B, L].
std::pair<Tensor, Tensor> sum_augment_batch(const Tensor &x, const Tensor &y, std::size_t k, Rng &rng);

/// [K0, K0/2, ..., 1]; K0 must be a power of two.
std::vector<std::size_t> cascade_schedule(std::size_t k0);

using LogitFn = std::function<Tensor(const Tensor &batch)>;

/// For each query row of x [B, ...], builds `reps` hybrids averaging it with
/// K-1 rows drawn from `pool` [P, ...] and returns model logits averaged
/// over the hybrids. K = 1 is a plain forward.
Tensor test_time_sum_augment(const Tensor &x, const Tensor &pool, std::size_t k, std::size_t reps,
                             const LogitFn &model, Rng &rng);

}  // namespace mdf

#endif  // MDF_AUGMENT_HPP_

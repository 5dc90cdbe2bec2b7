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
#ifndef MDF_TOKENIZER_HPP_
#define MDF_TOKENIZER_HPP_

#include <cstddef>
#include <vector>

#include "mdf/tensor.hpp"

namespace mdf {

/// Patch layout for a [C, spatial...] sample with isotropic patch size p.
struct PatchGrid {
  Shape input_shape;               // (C,H,W) or (C,D,H,W)
  std::size_t patch = 1;
  std::vector<std::size_t> cells;  // patches per spatial axis, ceil(extent/p)
  std::size_t token_count = 0;
  std::size_t token_dim = 0;       // C * p^k

  std::size_t spatial_rank() const { return cells.size(); }
};

PatchGrid make_patch_grid(const Shape &input_shape, std::size_t p);

/// Splits [C,H,W] (or a batch [B,C,H,W]) into [n, C*p*p] tokens in row-major
/// patch order. Element order inside a token is (c, row, col). Regions past
/// the image edge are zero.
Tensor patchify2d(const Tensor &image, std::size_t p);
/// Depth-major variant for [C,D,H,W] or [B,C,D,H,W].
Tensor patchify3d(const Tensor &volume, std::size_t p);
/// Dispatches on the rank of `grid.input_shape`; `x` may carry a leading
/// batch axis. Not differentiable (operates on raw samples).
Tensor patchify(const Tensor &x, const PatchGrid &grid);
/// Inverse of patchify; drops the padded region.
Tensor unpatchify(const Tensor &tokens, const PatchGrid &grid);

/// Per-axis widths of the sinusoidal code: d split into even parts, as equal
/// as possible, earlier axes taking the remainder. Throws ParameterError for
/// odd d.
std::vector<std::size_t> pos_axis_widths(std::size_t d, std::size_t axes);

/// Fixed sinusoidal table [n, d]: for each axis, interleaved sin/cos pairs
/// with frequency 10000^(-2i/w) over that axis' slice.
Tensor pos_table(const PatchGrid &grid, std::size_t d);

/// tokens + pos_table(grid, d); tokens are [n, d] or [B, n, d].
Tensor pos_embed(const Tensor &tokens, const PatchGrid &grid);

}  // namespace mdf

#endif  // MDF_TOKENIZER_HPP_

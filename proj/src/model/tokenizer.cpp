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
#include "mdf/tokenizer.hpp"

#include <cmath>

#include "mdf/error.hpp"
#include "mdf/ops.hpp"

namespace mdf {

PatchGrid make_patch_grid(const Shape &input_shape, std::size_t p) {
  if (p == 0) throw ParameterError("patch size must be >= 1");
  if (input_shape.size() != 3 && input_shape.size() != 4) {
    throw DimensionError("expected (C,H,W) or (C,D,H,W), got " + shape_str(input_shape));
  }
  PatchGrid g;
  g.input_shape = input_shape;
  g.patch = p;
  g.token_count = 1;
  g.token_dim = input_shape[0];
  for (std::size_t a = 1; a < input_shape.size(); ++a) {
    if (input_shape[a] == 0) throw DimensionError("empty spatial extent in " + shape_str(input_shape));
    g.cells.push_back((input_shape[a] + p - 1) / p);
    g.token_count *= g.cells.back();
    g.token_dim *= p;
  }
  if (input_shape[0] == 0) throw DimensionError("zero channels in " + shape_str(input_shape));
  return g;
}

namespace {

// Calls fn(token, within, src) for every in-bounds element, where src is the
// flat offset inside one sample.
template <typename Fn>
void for_each_patch_element(const PatchGrid &g, Fn &&fn) {
  const std::size_t p = g.patch;
  const std::size_t c_count = g.input_shape[0];
  if (g.spatial_rank() == 2) {
    const std::size_t h = g.input_shape[1], w = g.input_shape[2];
    for (std::size_t pr = 0; pr < g.cells[0]; ++pr) {
      for (std::size_t pc = 0; pc < g.cells[1]; ++pc) {
        const std::size_t tok = pr * g.cells[1] + pc;
        for (std::size_t c = 0; c < c_count; ++c) {
          for (std::size_t i = 0; i < p; ++i) {
            const std::size_t r = pr * p + i;
            if (r >= h) continue;
            for (std::size_t j = 0; j < p; ++j) {
              const std::size_t col = pc * p + j;
              if (col >= w) continue;
              fn(tok, (c * p + i) * p + j, (c * h + r) * w + col);
            }
          }
        }
      }
    }
    return;
  }
  const std::size_t dd = g.input_shape[1], h = g.input_shape[2], w = g.input_shape[3];
  for (std::size_t pd = 0; pd < g.cells[0]; ++pd) {
    for (std::size_t pr = 0; pr < g.cells[1]; ++pr) {
      for (std::size_t pc = 0; pc < g.cells[2]; ++pc) {
        const std::size_t tok = (pd * g.cells[1] + pr) * g.cells[2] + pc;
        for (std::size_t c = 0; c < c_count; ++c) {
          for (std::size_t a = 0; a < p; ++a) {
            const std::size_t z = pd * p + a;
            if (z >= dd) continue;
            for (std::size_t i = 0; i < p; ++i) {
              const std::size_t r = pr * p + i;
              if (r >= h) continue;
              for (std::size_t j = 0; j < p; ++j) {
                const std::size_t col = pc * p + j;
                if (col >= w) continue;
                fn(tok, ((c * p + a) * p + i) * p + j, ((c * dd + z) * h + r) * w + col);
              }
            }
          }
        }
      }
    }
  }
}

std::size_t batch_of(const Tensor &x, const Shape &sample, bool &batched) {
  const Shape &s = x.shape();
  if (s == sample) {
    batched = false;
    return 1;
  }
  if (s.size() == sample.size() + 1 && Shape(s.begin() + 1, s.end()) == sample) {
    batched = true;
    return s[0];
  }
  throw DimensionError("input " + shape_str(s) + " does not match sample shape " + shape_str(sample));
}

}  // namespace

Tensor patchify(const Tensor &x, const PatchGrid &grid) {
  bool batched = false;
  const std::size_t b = batch_of(x, grid.input_shape, batched);
  const std::size_t in_n = shape_numel(grid.input_shape);
  const std::size_t out_n = grid.token_count * grid.token_dim;
  std::vector<double> out(b * out_n, 0.0);
  const auto src = x.data();
  for (std::size_t s = 0; s < b; ++s) {
    const double *in = src.data() + s * in_n;
    double *dst = out.data() + s * out_n;
    for_each_patch_element(grid, [&](std::size_t tok, std::size_t within, std::size_t off) {
      dst[tok * grid.token_dim + within] = in[off];
    });
  }
  Shape shape = {grid.token_count, grid.token_dim};
  if (batched) shape.insert(shape.begin(), b);
  return Tensor::from(shape, std::move(out), x.dtype());
}

Tensor patchify2d(const Tensor &image, std::size_t p) {
  const Shape &s = image.shape();
  if (s.size() != 3 && s.size() != 4) throw DimensionError("patchify2d: expected [C,H,W], got " + shape_str(s));
  return patchify(image, make_patch_grid(Shape(s.end() - 3, s.end()), p));
}

Tensor patchify3d(const Tensor &volume, std::size_t p) {
  const Shape &s = volume.shape();
  if (s.size() != 4 && s.size() != 5) throw DimensionError("patchify3d: expected [C,D,H,W], got " + shape_str(s));
  return patchify(volume, make_patch_grid(Shape(s.end() - 4, s.end()), p));
}

Tensor unpatchify(const Tensor &tokens, const PatchGrid &grid) {
  bool batched = false;
  const std::size_t b = batch_of(tokens, Shape{grid.token_count, grid.token_dim}, batched);
  const std::size_t in_n = shape_numel(grid.input_shape);
  const std::size_t tok_n = grid.token_count * grid.token_dim;
  std::vector<double> out(b * in_n, 0.0);
  const auto src = tokens.data();
  for (std::size_t s = 0; s < b; ++s) {
    const double *in = src.data() + s * tok_n;
    double *dst = out.data() + s * in_n;
    for_each_patch_element(grid, [&](std::size_t tok, std::size_t within, std::size_t off) {
      dst[off] = in[tok * grid.token_dim + within];
    });
  }
  Shape shape = grid.input_shape;
  if (batched) shape.insert(shape.begin(), b);
  return Tensor::from(shape, std::move(out), tokens.dtype());
}

std::vector<std::size_t> pos_axis_widths(std::size_t d, std::size_t axes) {
  if (axes == 0) throw ParameterError("pos_axis_widths: no axes");
  if (d % 2 != 0) throw ParameterError("positional embedding width " + std::to_string(d) + " must be even");
  const std::size_t pairs = d / 2;
  if (pairs < axes) {
    throw ParameterError("positional embedding width " + std::to_string(d) + " too small for " +
                         std::to_string(axes) + " axes");
  }
  std::vector<std::size_t> widths(axes, 2 * (pairs / axes));
  for (std::size_t a = 0; a < pairs % axes; ++a) widths[a] += 2;
  return widths;
}

Tensor pos_table(const PatchGrid &grid, std::size_t d) {
  const auto widths = pos_axis_widths(d, grid.spatial_rank());
  std::vector<double> table(grid.token_count * d);
  std::vector<std::size_t> coord(grid.spatial_rank());
  for (std::size_t t = 0; t < grid.token_count; ++t) {
    std::size_t rem = t;
    for (std::size_t a = grid.spatial_rank(); a-- > 0;) {
      coord[a] = rem % grid.cells[a];
      rem /= grid.cells[a];
    }
    std::size_t off = 0;
    for (std::size_t a = 0; a < grid.spatial_rank(); ++a) {
      const double w = static_cast<double>(widths[a]);
      for (std::size_t i = 0; i < widths[a] / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / w);
        const double angle = static_cast<double>(coord[a]) * freq;
        table[t * d + off + 2 * i] = std::sin(angle);
        table[t * d + off + 2 * i + 1] = std::cos(angle);
      }
      off += widths[a];
    }
  }
  return Tensor::from({grid.token_count, d}, std::move(table));
}

Tensor pos_embed(const Tensor &tokens, const PatchGrid &grid) {
  const Shape &s = tokens.shape();
  if (s.size() < 2 || s[s.size() - 2] != grid.token_count) {
    throw DimensionError("pos_embed: tokens " + shape_str(s) + " do not match " +
                         std::to_string(grid.token_count) + " grid cells");
  }
  const std::size_t d = s.back();
  Tensor table = pos_table(grid, d).to(tokens.dtype());
  return ops::add(tokens, table);
}

}  // namespace mdf

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
#include "mdf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "mdf/error.hpp"
#include "numcore/gemm.hpp"

namespace mdf::ops {

namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

DType promote(DType a, DType b) { return (a == DType::f64 || b == DType::f64) ? DType::f64 : DType::f32; }

Tensor finish(const char *op, Shape shape, DType dt, std::vector<double> &&values) {
  for (auto &v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": produced a non-finite value");
    v = round_to(dt, v);
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->dtype = dt;
  impl->data = std::move(values);
  return Tensor(std::move(impl));
}

// Records `out` on the active tape when any input requires grad.
void attach(const char *op, Tensor &out, std::vector<ImplPtr> inputs, GradTape::BackwardFn fn) {
  GradTape *tape = active_tape();
  if (tape == nullptr) return;
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const ImplPtr &p) { return p->requires_grad; });
  if (!any) return;
  out.impl()->requires_grad = true;
  out.impl()->is_leaf = false;
  tape->record({op, out.impl_ptr(), std::move(inputs), std::move(fn)});
}

std::vector<double> &gbuf(TensorImpl *t) {
  if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
  return t->grad;
}

// Index mapping from an output element to the contributing element of each
// broadcast operand.
struct Broadcast {
  enum Mode { kSame, kASuffix, kBSuffix, kGeneral };
  Mode mode = kSame;
  Shape out;
  std::size_t n = 0, na = 0, nb = 0;
  std::vector<std::size_t> ai, bi;

  std::size_t a(std::size_t i) const {
    switch (mode) {
      case kSame:
      case kBSuffix:
        return i;
      case kASuffix:
        return i % na;
      default:
        return ai[i];
    }
  }
  std::size_t b(std::size_t i) const {
    switch (mode) {
      case kSame:
      case kASuffix:
        return i;
      case kBSuffix:
        return i % nb;
      default:
        return bi[i];
    }
  }
};

bool is_suffix(const Shape &small, const Shape &big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

std::vector<std::size_t> broadcast_index(const Shape &in, const Shape &out) {
  const std::size_t r = out.size();
  std::vector<std::size_t> stride(r, 0);
  std::size_t s = 1;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const std::size_t ax = in.size() - 1 - k;
    const std::size_t oax = r - 1 - k;
    stride[oax] = in[ax] == 1 ? 0 : s;
    s *= in[ax];
  }
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> idx(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = off;
    for (std::size_t d = r; d-- > 0;) {
      ++counter[d];
      off += stride[d];
      if (counter[d] < out[d]) break;
      off -= stride[d] * counter[d];
      counter[d] = 0;
    }
  }
  return idx;
}

Broadcast plan_broadcast(const Tensor &a, const Tensor &b) {
  Broadcast p;
  p.out = broadcast_shapes(a.shape(), b.shape());
  p.n = shape_numel(p.out);
  p.na = a.numel();
  p.nb = b.numel();
  if (a.shape() == b.shape()) {
    p.mode = Broadcast::kSame;
  } else if (a.shape() == p.out && is_suffix(b.shape(), p.out)) {
    p.mode = Broadcast::kBSuffix;
  } else if (b.shape() == p.out && is_suffix(a.shape(), p.out)) {
    p.mode = Broadcast::kASuffix;
  } else {
    p.mode = Broadcast::kGeneral;
    p.ai = broadcast_index(a.shape(), p.out);
    p.bi = broadcast_index(b.shape(), p.out);
  }
  return p;
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

Tensor binary(const char *name, BinOp op, const Tensor &a, const Tensor &b) {
  Broadcast p = plan_broadcast(a, b);
  const auto &av = a.impl()->data;
  const auto &bv = b.impl()->data;
  std::vector<double> out(p.n);
  switch (op) {
    case BinOp::kAdd:
      for (std::size_t i = 0; i < p.n; ++i) out[i] = av[p.a(i)] + bv[p.b(i)];
      break;
    case BinOp::kSub:
      for (std::size_t i = 0; i < p.n; ++i) out[i] = av[p.a(i)] - bv[p.b(i)];
      break;
    case BinOp::kMul:
      for (std::size_t i = 0; i < p.n; ++i) out[i] = av[p.a(i)] * bv[p.b(i)];
      break;
    case BinOp::kDiv:
      for (std::size_t i = 0; i < p.n; ++i) out[i] = av[p.a(i)] / bv[p.b(i)];
      break;
  }
  Tensor result = finish(name, p.out, promote(a.dtype(), b.dtype()), std::move(out));
  TensorImpl *ai = a.impl();
  TensorImpl *bi = b.impl();
  attach(name, result, {a.impl_ptr(), b.impl_ptr()}, [p = std::move(p), op, ai, bi](const std::vector<double> &g) {
    if (ai->requires_grad) {
      auto &ga = gbuf(ai);
      for (std::size_t i = 0; i < p.n; ++i) {
        double d = g[i];
        if (op == BinOp::kMul) d *= bi->data[p.b(i)];
        if (op == BinOp::kDiv) d /= bi->data[p.b(i)];
        ga[p.a(i)] += d;
      }
    }
    if (bi->requires_grad) {
      auto &gb = gbuf(bi);
      for (std::size_t i = 0; i < p.n; ++i) {
        double d = g[i];
        if (op == BinOp::kSub) d = -d;
        if (op == BinOp::kMul) d *= ai->data[p.a(i)];
        if (op == BinOp::kDiv) {
          const double bv = bi->data[p.b(i)];
          d = -d * ai->data[p.a(i)] / (bv * bv);
        }
        gb[p.b(i)] += d;
      }
    }
  });
  return result;
}

// Elementwise map; `deriv(x, y)` returns dy/dx.
template <typename F, typename D>
Tensor unary(const char *name, const Tensor &x, F f, D deriv) {
  const auto &xv = x.impl()->data;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  Tensor result = finish(name, x.shape(), x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  TensorImpl *yi = result.impl();
  attach(name, result, {x.impl_ptr()}, [xi, yi, deriv](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xi->data[i], yi->data[i]);
  });
  return result;
}

// [outer, len, inner] view of a tensor around one axis.
struct AxisView {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisView axis_view(const Shape &shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

std::size_t normalize_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ParameterError("axis " + std::to_string(axis) + " invalid for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

Shape broadcast_shapes(const Shape &a, const Shape &b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    }
    out[r - 1 - k] = std::max(da, db);
  }
  return out;
}

Tensor add(const Tensor &a, const Tensor &b) { return binary("add", BinOp::kAdd, a, b); }
Tensor sub(const Tensor &a, const Tensor &b) { return binary("sub", BinOp::kSub, a, b); }
Tensor mul(const Tensor &a, const Tensor &b) { return binary("mul", BinOp::kMul, a, b); }
Tensor div(const Tensor &a, const Tensor &b) { return binary("div", BinOp::kDiv, a, b); }

Tensor scale(const Tensor &x, double s) {
  return unary("scale", x, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor &x, double s) {
  return unary("add_scalar", x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor &x) { return scale(x, -1.0); }

Tensor exp(const Tensor &x) {
  return unary("exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor &x) {
  return unary("log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor &x) {
  return unary("sqrt", x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Tensor tanh(const Tensor &x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor &x) {
  return unary(
      "sigmoid", x,
      [](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor &x) {
  return unary("relu", x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor &x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  return unary(
      "gelu", x,
      [](double v) { return 0.5 * v * (1.0 + std::tanh(kC * (v + kA * v * v * v))); },
      [](double v, double) {
        const double t = std::tanh(kC * (v + kA * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kC * (1.0 + 3.0 * kA * v * v);
      });
}

Tensor pow(const Tensor &x, double exponent) {
  return unary(
      "pow", x, [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) { return exponent * std::pow(v, exponent - 1.0); });
}

Tensor square(const Tensor &x) {
  return unary("square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.rank() < 2 || b.rank() < 2) {
    throw DimensionError("matmul: operands need rank >= 2, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.dim(-2), k = a.dim(-1), k2 = b.dim(-2), n = b.dim(-1);
  if (k != k2) {
    throw DimensionError("matmul: inner dimensions differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const Shape abatch(a.shape().begin(), a.shape().end() - 2);
  const Shape bbatch(b.shape().begin(), b.shape().end() - 2);
  const Shape obatch = broadcast_shapes(abatch, bbatch);
  const std::size_t nbatch = shape_numel(obatch);
  Shape oshape = obatch;
  oshape.push_back(m);
  oshape.push_back(n);

  // Offsets (in matrices) of each batch element in a and b.
  std::vector<std::size_t> aoff, boff;
  const bool flat = bbatch.empty();
  if (!flat) {
    aoff = abatch.empty() ? std::vector<std::size_t>(nbatch, 0) : broadcast_index(abatch, obatch);
    boff = broadcast_index(bbatch, obatch);
  }
  const auto &av = a.impl()->data;
  const auto &bv = b.impl()->data;
  std::vector<double> out(nbatch * m * n, 0.0);
  if (flat) {
    // b is a single matrix: fold a's batch into rows.
    detail::gemm_nn(shape_numel(abatch) * m, k, n, av.data(), bv.data(), out.data());
  } else {
    for (std::size_t t = 0; t < nbatch; ++t) {
      detail::gemm_nn(m, k, n, av.data() + aoff[t] * m * k, bv.data() + boff[t] * k * n, out.data() + t * m * n);
    }
  }
  Tensor result = finish("matmul", oshape, promote(a.dtype(), b.dtype()), std::move(out));
  TensorImpl *ai = a.impl();
  TensorImpl *bi = b.impl();
  attach("matmul", result, {a.impl_ptr(), b.impl_ptr()},
         [ai, bi, m, k, n, nbatch, flat, aoff = std::move(aoff), boff = std::move(boff),
          arows = shape_numel(abatch) * m](const std::vector<double> &g) {
           if (flat) {
             if (ai->requires_grad) detail::gemm_nt(arows, n, k, g.data(), bi->data.data(), gbuf(ai).data());
             if (bi->requires_grad) detail::gemm_tn(arows, k, n, ai->data.data(), g.data(), gbuf(bi).data());
             return;
           }
           for (std::size_t t = 0; t < nbatch; ++t) {
             const double *gt = g.data() + t * m * n;
             if (ai->requires_grad) {
               detail::gemm_nt(m, n, k, gt, bi->data.data() + boff[t] * k * n, gbuf(ai).data() + aoff[t] * m * k);
             }
             if (bi->requires_grad) {
               detail::gemm_tn(m, k, n, ai->data.data() + aoff[t] * m * k, gt, gbuf(bi).data() + boff[t] * k * n);
             }
           }
         });
  return result;
}

Tensor linear(const Tensor &x, const Tensor &w, const Tensor &b) {
  Tensor y = matmul(x, w);
  return b.defined() ? add(y, b) : y;
}

Tensor reshape(const Tensor &x, const Shape &shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  std::vector<double> out = x.impl()->data;
  Tensor result = finish("reshape", shape, x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  attach("reshape", result, {x.impl_ptr()}, [xi](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
  return result;
}

Tensor permute(const Tensor &x, const std::vector<std::size_t> &perm) {
  const std::size_t r = x.rank();
  if (perm.size() != r) throw DimensionError("permute: permutation rank mismatch");
  std::vector<bool> used(r, false);
  for (auto p : perm) {
    if (p >= r || used[p]) throw ParameterError("permute: invalid permutation");
    used[p] = true;
  }
  const Shape &in = x.shape();
  Shape oshape(r);
  std::vector<std::size_t> istride(r, 1);
  for (std::size_t d = r; d-- > 1;) istride[d - 1] = istride[d] * in[d];
  std::vector<std::size_t> ostride_in(r);
  for (std::size_t d = 0; d < r; ++d) {
    oshape[d] = in[perm[d]];
    ostride_in[d] = istride[perm[d]];
  }
  const std::size_t n = x.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = off;
    for (std::size_t d = r; d-- > 0;) {
      ++counter[d];
      off += ostride_in[d];
      if (counter[d] < oshape[d]) break;
      off -= ostride_in[d] * counter[d];
      counter[d] = 0;
    }
  }
  const auto &xv = x.impl()->data;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[src[i]];
  Tensor result = finish("permute", oshape, x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  attach("permute", result, {x.impl_ptr()}, [xi, src = std::move(src)](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[src[i]] += g[i];
  });
  return result;
}

Tensor transpose(const Tensor &x) {
  if (x.rank() < 2) throw DimensionError("transpose: rank < 2");
  std::vector<std::size_t> perm(x.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[x.rank() - 1], perm[x.rank() - 2]);
  return permute(x, perm);
}

Tensor concat(const std::vector<Tensor> &parts, int axis) {
  if (parts.empty()) throw ParameterError("concat: no inputs");
  const std::size_t r = parts[0].rank();
  const std::size_t ax = normalize_axis(axis, r);
  Shape oshape = parts[0].shape();
  oshape[ax] = 0;
  DType dt = parts[0].dtype();
  for (const auto &p : parts) {
    if (p.rank() != r) throw DimensionError("concat: rank mismatch");
    for (std::size_t d = 0; d < r; ++d) {
      if (d != ax && p.shape()[d] != parts[0].shape()[d]) {
        throw DimensionError("concat: " + shape_str(p.shape()) + " vs " + shape_str(parts[0].shape()));
      }
    }
    oshape[ax] += p.shape()[ax];
    dt = promote(dt, p.dtype());
  }
  const AxisView ov = axis_view(oshape, ax);
  std::vector<double> out(shape_numel(oshape));
  std::vector<std::size_t> starts;
  std::size_t start = 0;
  for (const auto &p : parts) {
    starts.push_back(start);
    const std::size_t len = p.shape()[ax];
    const auto &pv = p.impl()->data;
    for (std::size_t o = 0; o < ov.outer; ++o) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(o * len * ov.inner), len * ov.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * ov.len + start) * ov.inner));
    }
    start += len;
  }
  Tensor result = finish("concat", oshape, dt, std::move(out));
  std::vector<ImplPtr> inputs;
  std::vector<TensorImpl *> raw;
  std::vector<std::size_t> lens;
  for (const auto &p : parts) {
    inputs.push_back(p.impl_ptr());
    raw.push_back(p.impl());
    lens.push_back(p.shape()[ax]);
  }
  attach("concat", result, std::move(inputs), [raw, lens, starts, ov](const std::vector<double> &g) {
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (!raw[j]->requires_grad) continue;
      auto &gp = gbuf(raw[j]);
      for (std::size_t o = 0; o < ov.outer; ++o) {
        const double *src = g.data() + (o * ov.len + starts[j]) * ov.inner;
        double *dst = gp.data() + o * lens[j] * ov.inner;
        for (std::size_t i = 0; i < lens[j] * ov.inner; ++i) dst[i] += src[i];
      }
    }
  });
  return result;
}

Tensor slice(const Tensor &x, int axis, std::size_t start, std::size_t length) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  if (start + length > x.shape()[ax]) throw DimensionError("slice: range exceeds axis extent");
  const AxisView v = axis_view(x.shape(), ax);
  Shape oshape = x.shape();
  oshape[ax] = length;
  const auto &xv = x.impl()->data;
  std::vector<double> out(v.outer * length * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>((o * v.len + start) * v.inner), length * v.inner,
                out.begin() + static_cast<std::ptrdiff_t>(o * length * v.inner));
  }
  Tensor result = finish("slice", oshape, x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  attach("slice", result, {x.impl_ptr()}, [xi, v, start, length](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < length * v.inner; ++i) {
        gx[(o * v.len + start) * v.inner + i] += g[o * length * v.inner + i];
      }
    }
  });
  return result;
}

Tensor sum(const Tensor &x) {
  const auto &xv = x.impl()->data;
  double s = 0.0;
  for (double v : xv) s += v;
  Tensor result = finish("sum", {}, x.dtype(), {s});
  TensorImpl *xi = x.impl();
  attach("sum", result, {x.impl_ptr()}, [xi](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (auto &v : gx) v += g[0];
  });
  return result;
}

Tensor mean(const Tensor &x) {
  if (x.numel() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum(const Tensor &x, int axis, bool keepdim) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  const AxisView v = axis_view(x.shape(), ax);
  Shape oshape = x.shape();
  if (keepdim) {
    oshape[ax] = 1;
  } else {
    oshape.erase(oshape.begin() + static_cast<std::ptrdiff_t>(ax));
  }
  const auto &xv = x.impl()->data;
  std::vector<double> out(v.outer * v.inner, 0.0);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t l = 0; l < v.len; ++l) {
      const double *row = xv.data() + (o * v.len + l) * v.inner;
      double *dst = out.data() + o * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += row[i];
    }
  }
  Tensor result = finish("sum_axis", oshape, x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  attach("sum_axis", result, {x.impl_ptr()}, [xi, v](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t l = 0; l < v.len; ++l) {
        for (std::size_t i = 0; i < v.inner; ++i) gx[(o * v.len + l) * v.inner + i] += g[o * v.inner + i];
      }
    }
  });
  return result;
}

Tensor mean(const Tensor &x, int axis, bool keepdim) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  return scale(sum(x, axis, keepdim), 1.0 / static_cast<double>(x.shape()[ax]));
}

Tensor softmax(const Tensor &x, int axis) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  const AxisView v = axis_view(x.shape(), ax);
  const auto &xv = x.impl()->data;
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.len * v.inner + i;
      double mx = xv[base];
      for (std::size_t l = 1; l < v.len; ++l) mx = std::max(mx, xv[base + l * v.inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < v.len; ++l) {
        const double e = std::exp(xv[base + l * v.inner] - mx);
        out[base + l * v.inner] = e;
        z += e;
      }
      for (std::size_t l = 0; l < v.len; ++l) out[base + l * v.inner] /= z;
    }
  }
  Tensor result = finish("softmax", x.shape(), x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  TensorImpl *yi = result.impl();
  attach("softmax", result, {x.impl_ptr()}, [xi, yi, v](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    const auto &y = yi->data;
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.len * v.inner + i;
        double dot = 0.0;
        for (std::size_t l = 0; l < v.len; ++l) dot += g[base + l * v.inner] * y[base + l * v.inner];
        for (std::size_t l = 0; l < v.len; ++l) {
          const std::size_t j = base + l * v.inner;
          gx[j] += y[j] * (g[j] - dot);
        }
      }
    }
  });
  return result;
}

Tensor log_softmax(const Tensor &x, int axis) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  const AxisView v = axis_view(x.shape(), ax);
  const auto &xv = x.impl()->data;
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.len * v.inner + i;
      double mx = xv[base];
      for (std::size_t l = 1; l < v.len; ++l) mx = std::max(mx, xv[base + l * v.inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < v.len; ++l) z += std::exp(xv[base + l * v.inner] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t l = 0; l < v.len; ++l) out[base + l * v.inner] = xv[base + l * v.inner] - lse;
    }
  }
  Tensor result = finish("log_softmax", x.shape(), x.dtype(), std::move(out));
  TensorImpl *xi = x.impl();
  TensorImpl *yi = result.impl();
  attach("log_softmax", result, {x.impl_ptr()}, [xi, yi, v](const std::vector<double> &g) {
    auto &gx = gbuf(xi);
    const auto &y = yi->data;
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.len * v.inner + i;
        double gs = 0.0;
        for (std::size_t l = 0; l < v.len; ++l) gs += g[base + l * v.inner];
        for (std::size_t l = 0; l < v.len; ++l) {
          const std::size_t j = base + l * v.inner;
          gx[j] += g[j] - std::exp(y[j]) * gs;
        }
      }
    }
  });
  return result;
}

Tensor layer_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, double eps) {
  if (!(eps > 0.0)) throw ParameterError("layer_norm: eps must be positive");
  if (x.rank() < 1) throw DimensionError("layer_norm: scalar input");
  const std::size_t d = x.dim(-1);
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw DimensionError("layer_norm: gamma/beta must have shape [" + std::to_string(d) + "], input " +
                         shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  const auto &xv = x.impl()->data;
  const auto &gv = gamma.impl()->data;
  const auto &bv = beta.impl()->data;
  std::vector<double> xhat(xv.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double *row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = gv[j] * h + bv[j];
    }
  }
  Tensor result = finish("layer_norm", x.shape(), promote(x.dtype(), gamma.dtype()), std::move(out));
  TensorImpl *xi = x.impl();
  TensorImpl *gi = gamma.impl();
  TensorImpl *bi = beta.impl();
  attach("layer_norm", result, {x.impl_ptr(), gamma.impl_ptr(), beta.impl_ptr()},
         [xi, gi, bi, d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](const std::vector<double> &g) {
           if (gi->requires_grad) {
             auto &gg = gbuf(gi);
             for (std::size_t r = 0; r < rows; ++r) {
               for (std::size_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * xhat[r * d + j];
             }
           }
           if (bi->requires_grad) {
             auto &gb = gbuf(bi);
             for (std::size_t r = 0; r < rows; ++r) {
               for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
             }
           }
           if (!xi->requires_grad) return;
           auto &gx = gbuf(xi);
           const auto &gam = gi->data;
           const double inv_d = 1.0 / static_cast<double>(d);
           for (std::size_t r = 0; r < rows; ++r) {
             double m1 = 0.0, m2 = 0.0;
             for (std::size_t j = 0; j < d; ++j) {
               const double dh = g[r * d + j] * gam[j];
               m1 += dh;
               m2 += dh * xhat[r * d + j];
             }
             m1 *= inv_d;
             m2 *= inv_d;
             for (std::size_t j = 0; j < d; ++j) {
               const double dh = g[r * d + j] * gam[j];
               gx[r * d + j] += inv_std[r] * (dh - m1 - xhat[r * d + j] * m2);
             }
           }
         });
  return result;
}

Tensor bce_with_logits(const Tensor &logits, const Tensor &targets) {
  if (logits.shape() != targets.shape()) {
    throw DimensionError("bce_with_logits: logits " + shape_str(logits.shape()) + " vs targets " +
                         shape_str(targets.shape()));
  }
  const auto &z = logits.impl()->data;
  const auto &y = targets.impl()->data;
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  Tensor result = finish("bce_with_logits", logits.shape(), logits.dtype(), std::move(out));
  TensorImpl *zi = logits.impl();
  auto yi = targets.impl_ptr();
  attach("bce_with_logits", result, {logits.impl_ptr()}, [zi, yi](const std::vector<double> &g) {
    auto &gz = gbuf(zi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = zi->data[i];
      const double s = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      gz[i] += g[i] * (s - yi->data[i]);
    }
  });
  return result;
}

}  // namespace mdf::ops

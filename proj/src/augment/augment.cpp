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
#include "mdf/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdf/error.hpp"

namespace mdf {

namespace {

struct Layout {
  std::size_t channels;
  std::vector<std::size_t> ext;     // spatial extents
  std::vector<std::size_t> stride;  // spatial strides (elements)
};

Layout layout_of(const Tensor &x) {
  const Shape &s = x.shape();
  if (s.size() != 3 && s.size() != 4) throw InputError("expected a [C,H,W] or [C,D,H,W] sample, got " + shape_str(s));
  Layout l;
  l.channels = s[0];
  l.ext.assign(s.begin() + 1, s.end());
  l.stride.assign(l.ext.size(), 1);
  for (std::size_t a = l.ext.size() - 1; a-- > 0;) l.stride[a] = l.stride[a + 1] * l.ext[a + 1];
  return l;
}

// out[coord] = in[src(coord)] per channel, with src returning false to fill 0.
template <typename Map>
Tensor remap(const Tensor &x, const Layout &l, Map &&map) {
  const std::size_t plane = l.stride[0] * l.ext[0];
  std::vector<double> out(x.numel(), 0.0);
  const auto in = x.data();
  std::vector<std::size_t> c(l.ext.size(), 0), src(l.ext.size());
  for (std::size_t i = 0; i < plane; ++i) {
    std::size_t rem = i;
    for (std::size_t a = 0; a < l.ext.size(); ++a) {
      c[a] = rem / l.stride[a];
      rem %= l.stride[a];
    }
    if (map(c, src)) {
      std::size_t off = 0;
      for (std::size_t a = 0; a < l.ext.size(); ++a) off += src[a] * l.stride[a];
      for (std::size_t ch = 0; ch < l.channels; ++ch) out[ch * plane + i] = in[ch * plane + off];
    }
  }
  return Tensor::from(x.shape(), std::move(out), x.dtype());
}

Tensor clamp01(std::vector<double> v, const Tensor &like) {
  for (auto &e : v) e = std::clamp(e, 0.0, 1.0);
  return Tensor::from(like.shape(), std::move(v), like.dtype());
}

std::pair<std::size_t, std::size_t> random_plane(std::size_t rank, Rng &rng) {
  if (rank == 2) return {0, 1};
  static const std::pair<std::size_t, std::size_t> planes[] = {{0, 1}, {0, 2}, {1, 2}};
  return planes[rng.index(3)];
}

}  // namespace

Tensor flip(const Tensor &x, std::size_t axis) {
  const Layout l = layout_of(x);
  if (axis >= l.ext.size()) throw ParameterError("flip axis " + std::to_string(axis) + " out of range");
  return remap(x, l, [&](const std::vector<std::size_t> &c, std::vector<std::size_t> &src) {
    src = c;
    src[axis] = l.ext[axis] - 1 - c[axis];
    return true;
  });
}

Tensor rot90(const Tensor &x, int k, std::size_t a, std::size_t b) {
  const Layout l = layout_of(x);
  if (a >= l.ext.size() || b >= l.ext.size() || a == b) throw ParameterError("invalid rotation plane");
  k = ((k % 4) + 4) % 4;
  if (k == 0) return x.clone();
  if (k % 2 == 1 && l.ext[a] != l.ext[b]) {
    throw InputError("quarter turns need a square plane, got " + shape_str(x.shape()));
  }
  const std::size_t n = l.ext[a], nb = l.ext[b];
  return remap(x, l, [&](const std::vector<std::size_t> &c, std::vector<std::size_t> &src) {
    src = c;
    const std::size_t i = c[a], j = c[b];
    // Counter-clockwise in the (a, b) plane.
    if (k == 1) {
      src[a] = j;
      src[b] = n - 1 - i;
    } else if (k == 2) {
      src[a] = n - 1 - i;
      src[b] = nb - 1 - j;
    } else {
      src[a] = n - 1 - j;
      src[b] = i;
    }
    return true;
  });
}

Tensor intensity_jitter(const Tensor &x, double sigma, Rng &rng) {
  std::vector<double> v(x.data().begin(), x.data().end());
  for (auto &e : v) e += rng.normal(0.0, sigma);
  return clamp01(std::move(v), x);
}

Tensor rand_augment_op(const Tensor &x, RandAugOp op, double m, bool sign, Rng &rng) {
  const Layout l = layout_of(x);
  const double s = sign ? 1.0 : -1.0;
  std::vector<double> v(x.data().begin(), x.data().end());
  switch (op) {
    case RandAugOp::identity:
      return x.clone();
    case RandAugOp::hflip:
      return flip(x, l.ext.size() - 1);
    case RandAugOp::vflip:
      return flip(x, l.ext.size() - 2);
    case RandAugOp::rot90: {
      auto [a, b] = random_plane(l.ext.size(), rng);
      const int k = 1 + static_cast<int>(rng.index(3));
      return k % 2 == 1 && l.ext[a] != l.ext[b] ? x.clone() : rot90(x, k, a, b);
    }
    case RandAugOp::brightness:
      for (auto &e : v) e += s * 0.3 * m;
      return clamp01(std::move(v), x);
    case RandAugOp::contrast: {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      const double f = 1.0 + s * 0.5 * m;
      for (auto &e : v) e = mean + f * (e - mean);
      return clamp01(std::move(v), x);
    }
    case RandAugOp::gamma: {
      const double g = std::exp(s * 0.7 * m);
      for (auto &e : v) e = std::pow(std::clamp(e, 0.0, 1.0), g);
      return clamp01(std::move(v), x);
    }
    case RandAugOp::translate: {
      const std::size_t axis = rng.index(l.ext.size());
      const auto shift = static_cast<long>(std::lround(0.15 * m * static_cast<double>(l.ext[axis])));
      const long d = sign ? shift : -shift;
      return remap(x, l, [&](const std::vector<std::size_t> &c, std::vector<std::size_t> &src) {
        src = c;
        const long from = static_cast<long>(c[axis]) - d;
        if (from < 0 || from >= static_cast<long>(l.ext[axis])) return false;
        src[axis] = static_cast<std::size_t>(from);
        return true;
      });
    }
  }
  throw ContractError("unknown RandAugment op");
}

Tensor rand_augment(const Tensor &x, int n, int magnitude, Rng &rng) {
  if (n < 0 || magnitude < 0 || magnitude > 10) throw ParameterError("RandAugment needs N >= 0 and M in [0, 10]");
  const double m = magnitude / 10.0;
  Tensor out = x;
  for (int i = 0; i < n; ++i) {
    const auto op = static_cast<RandAugOp>(rng.index(kRandAugOps));
    const bool sign = rng.bernoulli(0.5);
    out = rand_augment_op(out, op, m, sign, rng);
  }
  return out;
}

AugPipeline AugPipeline::standard() {
  AugPipeline p;
  AugStep h;
  h.kind = AugStep::Kind::hflip;
  AugStep v;
  v.kind = AugStep::Kind::vflip;
  AugStep r;
  r.kind = AugStep::Kind::rot90;
  r.p = 0.75;
  AugStep j;
  j.kind = AugStep::Kind::jitter;
  j.p = 1.0;
  j.sigma = 0.03;
  p.steps = {h, v, r, j};
  return p;
}

AugPipeline AugPipeline::randaugment(int n, int magnitude) {
  AugStep s;
  s.kind = AugStep::Kind::rand_augment;
  s.p = 1.0;
  s.n = n;
  s.magnitude = magnitude;
  return AugPipeline{{s}};
}

Tensor apply_pipeline(const Tensor &x, const AugPipeline &pipe, Rng &rng) {
  const Layout l = layout_of(x);
  Tensor out = x;
  for (const auto &st : pipe.steps) {
    if (!rng.bernoulli(st.p)) continue;
    switch (st.kind) {
      case AugStep::Kind::hflip:
        out = flip(out, l.ext.size() - 1);
        break;
      case AugStep::Kind::vflip:
        out = flip(out, l.ext.size() - 2);
        break;
      case AugStep::Kind::flip_axis:
        out = flip(out, st.axis);
        break;
      case AugStep::Kind::rot90: {
        auto plane = st.random_plane ? random_plane(l.ext.size(), rng) : std::make_pair(st.plane_a, st.plane_b);
        const int k = st.k >= 0 ? st.k : static_cast<int>(rng.index(4));
        if (k % 2 == 0 || l.ext[plane.first] == l.ext[plane.second]) out = rot90(out, k, plane.first, plane.second);
        break;
      }
      case AugStep::Kind::jitter:
        out = intensity_jitter(out, st.sigma, rng);
        break;
      case AugStep::Kind::rand_augment:
        out = rand_augment(out, st.n, st.magnitude, rng);
        break;
    }
  }
  return out;
}

std::pair<Tensor, Tensor> sum_augment(const std::vector<Tensor> &xs, const std::vector<Tensor> &ys) {
  if (xs.empty() || xs.size() != ys.size()) throw InputError("sum_augment needs K >= 1 samples with one label each");
  const double k = static_cast<double>(xs.size());
  std::vector<double> x(xs[0].numel(), 0.0), y(ys[0].numel(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].shape() != xs[0].shape()) {
      throw InputError("sum_augment: sample " + std::to_string(i) + " has shape " + shape_str(xs[i].shape()) +
                       ", expected " + shape_str(xs[0].shape()));
    }
    if (ys[i].shape() != ys[0].shape()) throw InputError("sum_augment: label vectors differ in length");
    const auto xd = xs[i].data();
    const auto yd = ys[i].data();
    for (std::size_t e = 0; e < x.size(); ++e) x[e] += xd[e];
    for (std::size_t e = 0; e < y.size(); ++e) y[e] += yd[e];
  }
  for (auto &e : x) e /= k;
  for (auto &e : y) e /= k;
  return {Tensor::from(xs[0].shape(), std::move(x), xs[0].dtype()), Tensor::from(ys[0].shape(), std::move(y), ys[0].dtype())};
}

std::pair<Tensor, Tensor> sum_augment_batch(const Tensor &x, const Tensor &y, std::size_t k, Rng &rng) {
  if (k == 0) throw ParameterError("sum augmentation K must be >= 1");
  if (x.rank() < 2 || y.rank() != 2 || x.dim(0) != y.dim(0)) {
    throw InputError("sum_augment_batch: x " + shape_str(x.shape()) + " and y " + shape_str(y.shape()) +
                     " disagree on the batch size");
  }
  if (k == 1) return {x, y};
  const std::size_t b = x.dim(0);
  const std::size_t xs = x.numel() / b, ys = y.numel() / b;
  std::vector<double> ox(x.numel(), 0.0), oy(y.numel(), 0.0);
  const auto xd = x.data();
  const auto yd = y.data();
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<std::size_t> group = {i};
    others.resize(b);
    std::iota(others.begin(), others.end(), 0);
    others.erase(others.begin() + static_cast<long>(i));
    rng.shuffle(others);
    for (std::size_t j = 0; group.size() < k; ++j) group.push_back(others.empty() ? i : others[j % others.size()]);
    for (std::size_t g : group) {
      for (std::size_t e = 0; e < xs; ++e) ox[i * xs + e] += xd[g * xs + e];
      for (std::size_t e = 0; e < ys; ++e) oy[i * ys + e] += yd[g * ys + e];
    }
    for (std::size_t e = 0; e < xs; ++e) ox[i * xs + e] /= static_cast<double>(k);
    for (std::size_t e = 0; e < ys; ++e) oy[i * ys + e] /= static_cast<double>(k);
  }
  return {Tensor::from(x.shape(), std::move(ox), x.dtype()), Tensor::from(y.shape(), std::move(oy), y.dtype())};
}

std::vector<std::size_t> cascade_schedule(std::size_t k0) {
  if (k0 == 0 || (k0 & (k0 - 1)) != 0) {
    throw ParameterError("cascade start K=" + std::to_string(k0) + " is not a power of two");
  }
  std::vector<std::size_t> s;
  for (std::size_t k = k0; k >= 1; k /= 2) s.push_back(k);
  return s;
}

Tensor test_time_sum_augment(const Tensor &x, const Tensor &pool, std::size_t k, std::size_t reps,
                             const LogitFn &model, Rng &rng) {
  if (k == 0 || reps == 0) throw ParameterError("TTSA needs K >= 1 and reps >= 1");
  if (k == 1) return model(x);
  if (!pool.defined() || pool.rank() == 0 || pool.dim(0) == 0) throw InputError("TTSA with K > 1 needs a non-empty pool");
  const std::size_t b = x.dim(0);
  const std::size_t per = x.numel() / b;
  if (pool.numel() / pool.dim(0) != per || Shape(pool.shape().begin() + 1, pool.shape().end()) !=
                                               Shape(x.shape().begin() + 1, x.shape().end())) {
    throw InputError("TTSA pool samples " + shape_str(pool.shape()) + " do not match queries " + shape_str(x.shape()));
  }
  const auto xd = x.data();
  const auto pd = pool.data();
  std::vector<double> mean;
  Shape out_shape;
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> hybrid(xd.begin(), xd.end());
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 1; j < k; ++j) {
        const std::size_t src = rng.index(pool.dim(0));
        for (std::size_t e = 0; e < per; ++e) hybrid[i * per + e] += pd[src * per + e];
      }
      for (std::size_t e = 0; e < per; ++e) hybrid[i * per + e] /= static_cast<double>(k);
    }
    Tensor logits = model(Tensor::from(x.shape(), std::move(hybrid), x.dtype()));
    if (r == 0) {
      mean.assign(logits.data().begin(), logits.data().end());
      out_shape = logits.shape();
      continue;
    }
    // Running mean keeps identical hybrids exact.
    const auto ld = logits.data();
    for (std::size_t e = 0; e < mean.size(); ++e) mean[e] += (ld[e] - mean[e]) / static_cast<double>(r + 1);
  }
  return Tensor::from(out_shape, std::move(mean));
}

}  // namespace mdf

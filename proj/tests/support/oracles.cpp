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
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "mdf/gradcheck.hpp"
#include "mdf/ops.hpp"
#include "mdf/random.hpp"

namespace mdf::test {

std::vector<double> matmul_oracle(std::span<const double> a, std::span<const double> b, std::size_t m, std::size_t k,
                                  std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

std::vector<double> layer_norm_oracle(std::span<const double> x, std::span<const double> gamma,
                                      std::span<const double> beta, double eps) {
  const std::size_t d = gamma.size();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < x.size() / d; ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += x[r * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += std::pow(x[r * d + j] - mean, 2);
    var /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      out[r * d + j] = gamma[j] * (x[r * d + j] - mean) / std::sqrt(var + eps) + beta[j];
    }
  }
  return out;
}

std::vector<double> sinusoid_1d(std::size_t pos, std::size_t w) {
  std::vector<double> v;
  for (std::size_t i = 0; i < w / 2; ++i) {
    const double denom = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(w));
    v.push_back(std::sin(static_cast<double>(pos) / denom));
    v.push_back(std::cos(static_cast<double>(pos) / denom));
  }
  return v;
}

std::size_t count_patches(const std::vector<std::size_t> &extents, std::size_t p) {
  std::size_t total = 1;
  for (std::size_t e : extents) {
    std::size_t n = 0;
    for (std::size_t o = 0; o < e; o += p) ++n;
    total *= n;
  }
  return total;
}

std::vector<double> attention_oracle(std::span<const double> q, std::span<const double> k, std::span<const double> v,
                                     std::size_t nq, std::size_t nk, std::size_t dk, std::size_t dv) {
  std::vector<double> out(nq * dv, 0.0);
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<double> score(nk);
    double top = -1e300;
    for (std::size_t j = 0; j < nk; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dk; ++c) s += q[i * dk + c] * k[j * dk + c];
      score[j] = s / std::sqrt(static_cast<double>(dk));
      top = std::max(top, score[j]);
    }
    double z = 0.0;
    for (auto &s : score) {
      s = std::exp(s - top);
      z += s;
    }
    for (std::size_t j = 0; j < nk; ++j) {
      for (std::size_t c = 0; c < dv; ++c) out[i * dv + c] += score[j] / z * v[j * dv + c];
    }
  }
  return out;
}

std::vector<GradientCase> gradient_suite() {
  using V = const std::vector<Tensor> &;
  std::vector<GradientCase> s;
  s.push_back({"add", {{3, 4}, {3, 4}}, false, false, [](V in) { return ops::add(in[0], in[1]); }});
  s.push_back({"add_broadcast", {{2, 3, 4}, {4}}, false, false, [](V in) { return ops::add(in[0], in[1]); }});
  s.push_back({"sub_broadcast", {{3, 1}, {2, 1, 4}}, false, false, [](V in) { return ops::sub(in[0], in[1]); }});
  s.push_back({"mul", {{3, 4}, {3, 4}}, false, false, [](V in) { return ops::mul(in[0], in[1]); }});
  s.push_back({"mul_broadcast", {{2, 3, 4}, {3, 1}}, false, false, [](V in) { return ops::mul(in[0], in[1]); }});
  s.push_back({"div", {{3, 4}, {3, 4}}, true, false, [](V in) { return ops::div(in[0], in[1]); }});
  s.push_back({"scale", {{5}}, false, false, [](V in) { return ops::scale(in[0], -1.7); }});
  s.push_back({"add_scalar", {{5}}, false, false, [](V in) { return ops::add_scalar(in[0], 0.3); }});
  s.push_back({"neg", {{5}}, false, false, [](V in) { return ops::neg(in[0]); }});
  s.push_back({"exp", {{3, 3}}, false, false, [](V in) { return ops::exp(in[0]); }});
  s.push_back({"log", {{3, 3}}, false, true, [](V in) { return ops::log(in[0]); }});
  s.push_back({"sqrt", {{3, 3}}, false, true, [](V in) { return ops::sqrt(in[0]); }});
  s.push_back({"tanh", {{3, 3}}, false, false, [](V in) { return ops::tanh(in[0]); }});
  s.push_back({"sigmoid", {{3, 3}}, false, false, [](V in) { return ops::sigmoid(in[0]); }});
  s.push_back({"relu", {{3, 3}}, true, false, [](V in) { return ops::relu(in[0]); }});
  s.push_back({"gelu", {{3, 3}}, false, false, [](V in) { return ops::gelu(in[0]); }});
  s.push_back({"pow", {{3, 3}}, false, true, [](V in) { return ops::pow(in[0], 2.5); }});
  s.push_back({"square", {{3, 3}}, false, false, [](V in) { return ops::square(in[0]); }});
  s.push_back({"matmul", {{4, 5}, {5, 3}}, false, false, [](V in) { return ops::matmul(in[0], in[1]); }});
  s.push_back({"matmul_batched", {{2, 3, 4}, {2, 4, 2}}, false, false, [](V in) { return ops::matmul(in[0], in[1]); }});
  s.push_back({"matmul_broadcast", {{2, 2, 3, 4}, {2, 4, 2}}, false, false,
               [](V in) { return ops::matmul(in[0], in[1]); }});
  s.push_back({"linear", {{2, 3, 4}, {4, 5}, {5}}, false, false, [](V in) { return ops::linear(in[0], in[1], in[2]); }});
  s.push_back({"reshape", {{2, 6}}, false, false, [](V in) { return ops::reshape(in[0], {3, 4}); }});
  s.push_back({"permute", {{2, 3, 4}}, false, false, [](V in) { return ops::permute(in[0], {2, 0, 1}); }});
  s.push_back({"transpose", {{3, 4}}, false, false, [](V in) { return ops::transpose(in[0]); }});
  s.push_back({"concat", {{2, 3}, {2, 2}}, false, false, [](V in) { return ops::concat({in[0], in[1]}, 1); }});
  s.push_back({"slice", {{4, 5}}, false, false, [](V in) { return ops::slice(in[0], 1, 1, 3); }});
  s.push_back({"sum", {{3, 4}}, false, false, [](V in) { return ops::sum(in[0]); }});
  s.push_back({"mean", {{3, 4}}, false, false, [](V in) { return ops::mean(in[0]); }});
  s.push_back({"sum_axis", {{3, 4, 2}}, false, false, [](V in) { return ops::sum(in[0], 1); }});
  s.push_back({"mean_axis", {{3, 4, 2}}, false, false, [](V in) { return ops::mean(in[0], 0, true); }});
  s.push_back({"softmax", {{3, 5}}, false, false, [](V in) { return ops::softmax(in[0], -1); }});
  s.push_back({"softmax_axis0", {{4, 3}}, false, false, [](V in) { return ops::softmax(in[0], 0); }});
  s.push_back({"log_softmax", {{3, 5}}, false, false, [](V in) { return ops::log_softmax(in[0], -1); }});
  s.push_back({"layer_norm", {{3, 6}, {6}, {6}}, false, false,
               [](V in) { return ops::layer_norm(in[0], in[1], in[2], 1e-5); }});
  s.push_back({"bce_with_logits", {{4, 3}}, false, false, [](V in) {
                 Tensor y = Tensor::from({4, 3}, {1, 0, 1, 0, 0, 1, 1, 1, 0, 0.5, 0.25, 1});
                 return ops::bce_with_logits(in[0], y);
               }});
  return s;
}

double run_gradient_case(const GradientCase &c, int trials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Tensor> inputs;
    for (const auto &shape : c.shapes) {
      Tensor x = randn(shape, rng);
      for (auto &v : x.mutable_data()) {
        if (c.positive) v = 0.2 + std::abs(v);
        if (c.away_from_zero) v = (v < 0 ? -1.0 : 1.0) * (0.1 + std::abs(v));
      }
      inputs.push_back(x);
    }
    Tensor probe;
    {
      NoGradScope ng;
      probe = c.fn(inputs);
    }
    Tensor weights = randn(probe.shape(), rng);
    auto res = grad_check([&](const std::vector<Tensor> &in) { return ops::sum(ops::mul(c.fn(in), weights)); },
                          inputs, 1e-3);
    worst = std::max(worst, res.max_rel_err);
  }
  return worst;
}

namespace {

std::vector<double> column_means(const std::vector<double> &z, std::size_t n, std::size_t d) {
  std::vector<double> m(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m[c] += z[r * d + c];
  for (auto &v : m) v /= static_cast<double>(n);
  return m;
}

double view_variance(const std::vector<double> &z, std::size_t n, std::size_t d, double gamma, double eps) {
  auto m = column_means(z, n, d);
  double acc = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += (z[r * d + c] - m[c]) * (z[r * d + c] - m[c]);
    const double sd = std::sqrt(s / static_cast<double>(n - 1) + eps);
    acc += std::max(0.0, gamma - sd);
  }
  return acc / static_cast<double>(d);
}

double view_covariance(const std::vector<double> &z, std::size_t n, std::size_t d) {
  if (d < 2) return 0.0;
  auto m = column_means(z, n, d);
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += (z[r * d + i] - m[i]) * (z[r * d + j] - m[j]);
      s /= static_cast<double>(n - 1);
      acc += s * s;
    }
  return acc / static_cast<double>(d * (d - 1));
}

}  // namespace

VicregOracle vicreg_oracle(const std::vector<double> &a, const std::vector<double> &b, std::size_t n, std::size_t d,
                           double gamma, double eps) {
  VicregOracle o{};
  double se = 0.0, cs = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double x = a[r * d + c], y = b[r * d + c];
      se += (x - y) * (x - y);
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    cs += 1.0 - dot / std::sqrt(na * nb);
  }
  o.mse = se / static_cast<double>(n * d);
  o.cosine = cs / static_cast<double>(n);
  o.variance = 0.5 * (view_variance(a, n, d, gamma, eps) + view_variance(b, n, d, gamma, eps));
  o.covariance = 0.5 * (view_covariance(a, n, d) + view_covariance(b, n, d));
  return o;
}

double barlow_oracle(const std::vector<double> &a, const std::vector<double> &b, std::size_t n, std::size_t d,
                     double lambda) {
  auto standardize = [&](const std::vector<double> &z) {
    auto m = column_means(z, n, d);
    std::vector<double> out(z.size());
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += (z[r * d + c] - m[c]) * (z[r * d + c] - m[c]);
      const double sd = std::sqrt(s / static_cast<double>(n));
      for (std::size_t r = 0; r < n; ++r) out[r * d + c] = (z[r * d + c] - m[c]) / sd;
    }
    return out;
  };
  auto za = standardize(a), zb = standardize(b);
  double loss = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double c = 0.0;
      for (std::size_t r = 0; r < n; ++r) c += za[r * d + i] * zb[r * d + j];
      c /= static_cast<double>(n);
      loss += i == j ? (1.0 - c) * (1.0 - c) : lambda * c * c;
    }
  return loss;
}

double auc_pair_oracle(const std::vector<double> &scores, const std::vector<int> &labels) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / pairs;
}

std::vector<double> adamw_quadratic_oracle(std::vector<double> w, int steps, double lr, double b1, double b2,
                                           double eps, double wd) {
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0);
  for (int t = 1; t <= steps; ++t) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = 2.0 * w[i];
      w[i] -= lr * wd * w[i];
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      w[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  return w;
}

}  // namespace mdf::test

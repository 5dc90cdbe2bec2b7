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
#include "numcore/gemm.hpp"

#include <algorithm>

#include "mdf/threads.hpp"

namespace mdf::detail {

namespace {

// Rows per worker so a chunk carries roughly 64k multiply-adds.
std::size_t min_rows(std::size_t work_per_row) {
  return std::max<std::size_t>(1, (std::size_t{1} << 16) / std::max<std::size_t>(work_per_row, 1));
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double *a, const double *b, double *c) {
  parallel_for(m, min_rows(k * n), [=](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double *__restrict crow = c + i * n;
      const double *arow = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        const double *__restrict brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double *a, const double *b, double *c) {
  parallel_for(m, min_rows(k * n), [=](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double *__restrict arow = a + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double *__restrict brow = b + p * n;
        // Four interleaved partial sums; the order is fixed, so still deterministic.
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
          s0 += arow[j] * brow[j];
          s1 += arow[j + 1] * brow[j + 1];
          s2 += arow[j + 2] * brow[j + 2];
          s3 += arow[j + 3] * brow[j + 3];
        }
        for (; j < n; ++j) s0 += arow[j] * brow[j];
        c[i * k + p] += (s0 + s1) + (s2 + s3);
      }
    }
  });
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double *a, const double *b, double *c) {
  // Split over output rows p; each element still sums over i in order.
  parallel_for(k, min_rows(m * n), [=](std::size_t lo, std::size_t hi) {
    for (std::size_t i = 0; i < m; ++i) {
      const double *arow = a + i * k;
      const double *__restrict brow = b + i * n;
      for (std::size_t p = lo; p < hi; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        double *__restrict crow = c + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

}  // namespace mdf::detail

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
#ifndef MDF_SRC_NUMCORE_GEMM_HPP_
#define MDF_SRC_NUMCORE_GEMM_HPP_

#include <cstddef>

// Row-major accumulate-into kernels. Summation order is fixed, so results
// are bit-reproducible.
namespace mdf::detail {

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double *a, const double *b, double *c);
// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double *a, const double *b, double *c);
// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double *a, const double *b, double *c);

}  // namespace mdf::detail

#endif  // MDF_SRC_NUMCORE_GEMM_HPP_

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
#ifndef MDF_THREADS_HPP_
#define MDF_THREADS_HPP_

#include <cstddef>
#include <functional>

namespace mdf {

/// Worker cap for the compute kernels. Defaults to MEDFORMER_THREADS when set
/// to a positive integer, else the hardware concurrency.
std::size_t num_threads();
/// 0 restores the default.
void set_num_threads(std::size_t n);

/// Runs body(lo, hi) over a partition of [0, n) into contiguous chunks.
/// Chunks never overlap, so kernels that write disjoint outputs per index
/// give the same bits for any thread count.
void parallel_for(std::size_t n, std::size_t min_chunk, const std::function<void(std::size_t, std::size_t)> &body);

}  // namespace mdf

#endif  // MDF_THREADS_HPP_

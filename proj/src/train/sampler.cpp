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
#include "mdf/error.hpp"
#include "mdf/trainer.hpp"

namespace mdf {

MultitaskSampler::MultitaskSampler(std::vector<std::size_t> sizes, std::vector<std::size_t> batch_sizes,
                                   std::uint64_t seed)
    : sizes_(std::move(sizes)), batch_sizes_(std::move(batch_sizes)), rng_(seed) {
  if (sizes_.empty()) throw ConfigError("sampler needs at least one task");
  if (batch_sizes_.size() != sizes_.size()) throw ConfigError("sampler needs one batch size per task");
  for (std::size_t t = 0; t < sizes_.size(); ++t) {
    if (sizes_[t] == 0) throw ConfigError("task " + std::to_string(t) + " has an empty dataset");
    if (batch_sizes_[t] == 0) throw ConfigError("batch size must be positive");
  }
}

MultitaskSampler::MultitaskSampler(std::vector<std::size_t> sizes, std::size_t batch_size, std::uint64_t seed)
    : MultitaskSampler(sizes, std::vector<std::size_t>(sizes.size(), batch_size), seed) {}

std::vector<SampledBatch> MultitaskSampler::epoch() {
  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t t = 0; t < sizes_.size(); ++t)
    for (std::size_t i = 0; i < sizes_[t]; ++i) index.emplace_back(t, i);
  rng_.shuffle(index);
  ++epochs_;
  std::vector<SampledBatch> out;
  std::vector<std::vector<std::size_t>> buffers(sizes_.size());
  for (const auto &[t, i] : index) {
    buffers[t].push_back(i);
    if (buffers[t].size() == batch_sizes_[t]) {
      out.push_back({t, std::move(buffers[t])});
      buffers[t].clear();
    }
  }
  for (std::size_t t = 0; t < buffers.size(); ++t) {
    if (!buffers[t].empty()) out.push_back({t, std::move(buffers[t])});
  }
  return out;
}

SampledBatch MultitaskSampler::next() {
  if (cursor_ >= pending_.size()) {
    pending_ = epoch();
    cursor_ = 0;
  }
  return pending_[cursor_++];
}

}  // namespace mdf

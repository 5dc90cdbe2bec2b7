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
#include "mdf/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mdf/error.hpp"
#include "mdf/medformer.hpp"

namespace mdf {

double accuracy(const std::vector<int> &predictions, const std::vector<int> &labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw MetricError("accuracy of an empty set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double auc(const std::vector<double> &scores, const std::vector<int> &labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum of positives, with tied groups sharing their mean rank.
  std::uint64_t pos = 0, neg = 0, twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_mean_rank = (i + 1) + j;
    for (std::size_t t = i; t < j; ++t) {
      const int y = labels[order[t]];
      if (y != 0 && y != 1) throw LabelError("auc: labels must be 0 or 1");
      if (y == 1) {
        ++pos;
        twice_rank_sum += twice_mean_rank;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw MetricError("auc is undefined when only one class is present");
  // 2U = 2R - P(P+1)
  const std::uint64_t twice_u = twice_rank_sum - pos * (pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double macro_auc(const std::vector<double> &scores, const std::vector<int> &labels, std::size_t k, bool multi_hot) {
  if (k == 0 || scores.size() % k != 0) throw DimensionError("macro_auc: score matrix is not [n, k]");
  const std::size_t n = scores.size() / k;
  if (labels.size() != (multi_hot ? n * k : n)) throw DimensionError("macro_auc: label count mismatch");
  double acc = 0.0;
  std::size_t used = 0;
  std::vector<double> col(n);
  std::vector<int> bin(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores[i * k + c];
      bin[i] = multi_hot ? labels[i * k + c] : static_cast<int>(labels[i] == static_cast<int>(c));
      positives += bin[i] == 1;
    }
    if (positives == 0 || positives == n) continue;
    acc += auc(col, bin);
    ++used;
  }
  if (used == 0) throw MetricError("macro_auc: no class has both positive and negative samples");
  return acc / static_cast<double>(used);
}

TaskMetrics evaluate_logits(const Tensor &logits, const std::vector<int> &labels, const TaskDef &tdef) {
  TaskMetrics m;
  m.accuracy = accuracy(decode(logits, tdef), labels);
  const auto scores = class_scores(logits, tdef);
  try {
    if (tdef.type == TaskType::binary) {
      m.auc = auc(scores, labels);
    } else {
      m.auc = macro_auc(scores, labels, tdef.num_classes, tdef.type == TaskType::multi_label);
    }
    m.has_auc = true;
  } catch (const MetricError &) {
    m.has_auc = false;
  }
  return m;
}

}  // namespace mdf

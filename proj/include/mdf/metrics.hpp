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
#ifndef MDF_METRICS_HPP_
#define MDF_METRICS_HPP_

#include <vector>

#include "mdf/task.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

/// Fraction of positions where predictions equal labels.
double accuracy(const std::vector<int> &predictions, const std::vector<int> &labels);

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie). labels in {0,1};
/// MetricError unless both classes occur.
double auc(const std::vector<double> &scores, const std::vector<int> &labels);

/// Macro one-vs-rest AUC over the classes that have both positive and
/// negative samples. scores [n, k] row-major; labels either n class indices
/// (`multi_hot` false) or n*k bits.
double macro_auc(const std::vector<double> &scores, const std::vector<int> &labels, std::size_t k,
                 bool multi_hot = false);

struct TaskMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  bool has_auc = false;
};

/// Accuracy from decode() and AUC from class_scores() for one task.
TaskMetrics evaluate_logits(const Tensor &logits, const std::vector<int> &labels, const TaskDef &tdef);

}  // namespace mdf

#endif  // MDF_METRICS_HPP_

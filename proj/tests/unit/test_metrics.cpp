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
#include <doctest.h>

#include <cmath>

#include "mdf/error.hpp"
#include "mdf/medformer.hpp"
#include "mdf/metrics.hpp"
#include "mdf/random.hpp"
#include "support/oracles.hpp"

using namespace mdf;

TEST_SUITE("metrics") {
  TEST_CASE("accuracy examples") {
    CHECK(accuracy({1, 0, 2}, {1, 0, 2}) == 1.0);
    CHECK(accuracy({0, 0}, {1, 1}) == 0.0);
    CHECK(accuracy({1, 1, 0, 1}, {1, 1, 0, 0}) == 0.75);
    CHECK_THROWS_AS(accuracy({1}, {1, 0}), DimensionError);
  }

  TEST_CASE("auc examples") {
    CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    CHECK(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), MetricError);
  }

  TEST_CASE("auc equals brute-force pair counting with ties") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng.index(40);
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.index(8)) / 4.0;  // coarse grid forces ties
        y[i] = static_cast<int>(rng.index(2));
      }
      y[0] = 0;
      y[1] = 1;
      CHECK(auc(s, y) == test::auc_pair_oracle(s, y));
    }
  }

  TEST_CASE("auc is invariant under strictly monotone score transforms") {
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> s(30), t(30);
      std::vector<int> y(30);
      for (std::size_t i = 0; i < 30; ++i) {
        s[i] = rng.normal();
        t[i] = std::exp(3.0 * s[i]) + 1.0;
        y[i] = static_cast<int>(i % 2);
      }
      CHECK(auc(s, y) == auc(t, y));
    }
  }

  TEST_CASE("macro auc averages one-vs-rest and skips absent classes") {
    // Perfect scores for classes 0 and 1; class 2 absent.
    std::vector<double> sc = {0.9, 0.1, 0.0, 0.8, 0.2, 0.0, 0.1, 0.9, 0.0, 0.2, 0.7, 0.1};
    CHECK(macro_auc(sc, {0, 0, 1, 1}, 3) == 1.0);
    std::vector<int> multi = {1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1};
    const double m = macro_auc(sc, multi, 3, true);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK_THROWS_AS(macro_auc({0.1, 0.9}, {0}, 2), MetricError);
  }

  TEST_CASE("evaluate_logits for each task type") {
    TaskDef t;
    t.name = "x";
    t.type = TaskType::binary;
    t.num_classes = 2;
    auto m = evaluate_logits(Tensor::from({4, 1}, {-2, -1, 1, 2}), {0, 0, 1, 1}, t);
    CHECK(m.accuracy == 1.0);
    CHECK(m.has_auc);
    CHECK(m.auc == 1.0);
    t.type = TaskType::single_label;
    t.num_classes = 3;
    m = evaluate_logits(Tensor::from({3, 3}, {3, 0, 0, 0, 3, 0, 0, 0, 3}), {0, 1, 1}, t);
    CHECK(std::abs(m.accuracy - 2.0 / 3.0) < 1e-15);
    m = evaluate_logits(Tensor::from({2, 3}, {3, 0, 0, 0, 3, 0}), {0, 0}, t);
    CHECK_FALSE(m.has_auc);
  }
}

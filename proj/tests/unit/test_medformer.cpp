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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdf/error.hpp"
#include "mdf/medformer.hpp"
#include "mdf/ops.hpp"
#include "mdf/random.hpp"
#include "support/fixtures.hpp"

using namespace mdf;

using namespace mdf::test;

TEST_SUITE("medformer") {
  TEST_CASE("small and large presets") {
    ModelConfig s = ModelConfig::small();
    CHECK(s.hidden_dim == 128);
    CHECK(s.main_layers == 4);
    CHECK(s.num_heads == 4);
    CHECK(s.patch_size == 4);
    CHECK(s.latent_tokens == 32);
    CHECK(s.latent_dim == 64);
    CHECK(s.expander_widths == std::vector<std::size_t>{1024, 1024, 1024});
    ModelConfig l = ModelConfig::large();
    CHECK(l.hidden_dim == 512);
    CHECK(l.patch_size == 16);
    CHECK(l.latent_tokens == 512);
    CHECK(l.latent_dim == 256);
    ModelConfig bad = s;
    bad.num_heads = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(model_config_from_node(model_config_to_node(l)) == l);
  }

  TEST_CASE("small config shapes for 2D and 3D inputs") {
    LatentsConfig lc = demo_latents();
    auto t2 = make_task("b_multiclass", 2, TaskType::single_label, 4, {3, 28, 28}, "microscopic", "tissue");
    auto t3 = make_task("c_volume", 3, TaskType::binary, 2, {1, 28, 28, 28}, "ct_scan", "abdominal");
    ModelConfig cfg = ModelConfig::small();
    cfg.main_layers = 1;
    Medformer m(cfg, lc, {t2, t3}, 1);
    Rng rng(1);
    Tensor x2 = rand_uniform({3, 28, 28}, rng, 0.0, 1.0);
    CHECK(m.input_adaptformer(x2, t2).shape() == Shape{49, 128});
    Tensor x3 = rand_uniform({1, 28, 28, 28}, rng, 0.0, 1.0);
    CHECK(m.input_adaptformer(x3, t3).shape() == Shape{343, 128});
  }

  TEST_CASE("main body keeps [49,128] through 4 layers and is identity at init") {
    Medformer m(ModelConfig::small(), demo_latents(), {}, 2);
    Rng rng(2);
    Tensor h = randn({49, 128}, rng, 1.0, DType::f32);
    Tensor o = m.main_body(h);
    CHECK(o.shape() == Shape{49, 128});
    CHECK(std::equal(o.data().begin(), o.data().end(), h.data().begin()));
  }

  TEST_CASE("input adaptformer is identity over embedded tokens at init") {
    auto tasks = demo_tasks();
    Medformer m(tiny(), demo_latents(), tasks, 3);
    Rng rng(3);
    Tensor x = rand_uniform({2, 3, 8, 8}, rng, 0.0, 1.0);
    const TaskDef &t = m.task("b_multiclass");
    Tensor got = m.input_adaptformer(x, t);
    PatchGrid g = make_patch_grid(t.input_shape, 4);
    Linear emb;
    for (const auto &p : m.parameters()) {
      if (p.name == "embed.2d.c3.w") emb.w = p.tensor;
      if (p.name == "embed.2d.c3.b") emb.b = p.tensor;
    }
    REQUIRE(emb.w.defined());
    Tensor want = pos_embed(emb(patchify(x, g)), g);
    CHECK(std::equal(got.data().begin(), got.data().end(), want.data().begin()));
  }

  TEST_CASE("main body is permutation equivariant over tokens") {
    Medformer m(tiny(), demo_latents(), {}, 4);
    Rng rng(4);
    randomize(m, rng);
    Tensor h = randn({6, 12}, rng);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    auto rows = [&](const Tensor &t) {
      std::vector<double> out(t.numel());
      for (std::size_t i = 0; i < 6; ++i) std::copy_n(t.data().begin() + perm[i] * 12, 12, out.begin() + i * 12);
      return Tensor::from({6, 12}, out);
    };
    Tensor a = rows(m.main_body(h));
    Tensor b = m.main_body(rows(h));
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-6);
  }

  TEST_CASE("output widths follow the task type") {
    auto tasks = demo_tasks();
    Medformer m(tiny(), demo_latents(), tasks, 5);
    Rng rng(5);
    for (const auto &t : tasks) {
      Shape s = t.input_shape;
      s.insert(s.begin(), 3);
      Tensor logits = m.forward(rand_uniform(s, rng, 0.0, 1.0), t);
      CHECK(logits.shape() == Shape{3, t.out_dim()});
    }
    CHECK(m.task("b_multiclass").out_dim() == 4);
    CHECK(m.task("a_binary").out_dim() == 1);
    CHECK(m.task("e_ordinal").out_dim() == 1);
  }

  TEST_CASE("mean pooling of a constant token matrix returns the row") {
    auto tasks = demo_tasks();
    Medformer m(tiny(DType::f32), demo_latents(), tasks, 6);
    Rng rng(6);
    Tensor row = randn({1, 12}, rng, 1.0, DType::f32);
    std::vector<double> rep;
    for (int i = 0; i < 49; ++i) rep.insert(rep.end(), row.data().begin(), row.data().end());
    Tensor pooled = ops::mean(Tensor::from({49, 12}, rep, DType::f32), 0);
    CHECK(std::equal(pooled.data().begin(), pooled.data().end(), row.data().begin()));
  }

  TEST_CASE("forward is finite, recorded and deterministic") {
    auto tasks = demo_tasks();
    Medformer a(tiny(), demo_latents(), tasks, 7);
    Medformer b(tiny(), demo_latents(), tasks, 7);
    Rng rng(7);
    Tensor x = rand_uniform({4, 1, 8, 8}, rng, 0.0, 1.0);
    GradTape tape;
    Tensor la;
    {
      TapeScope scope(tape);
      la = a.forward(x, a.task("a_binary"));
    }
    CHECK(tape.size() > 50);
    for (double v : la.data()) CHECK(std::isfinite(v));
    Tensor lb = b.forward(x, b.task("a_binary"));
    CHECK(std::equal(la.data().begin(), la.data().end(), lb.data().begin()));
  }

  TEST_CASE("modality latent changes the logits once it moves") {
    auto tasks = demo_tasks();
    Medformer m(tiny(), demo_latents(), tasks, 8);
    Rng rng(8);
    randomize(m, rng);
    TaskDef t = m.task("a_binary");
    Tensor x = rand_uniform({2, 1, 8, 8}, rng, 0.0, 1.0);
    Tensor before = m.forward(x, t);
    Tensor lat = m.bank().get(LatentCategory::modality, "chest_xray");
    for (auto &v : lat.mutable_data()) v += rng.normal(0.0, 0.5);
    Tensor after = m.forward(x, t);
    double diff = 0.0;
    for (std::size_t i = 0; i < before.numel(); ++i) diff += std::abs(before.data()[i] - after.data()[i]);
    CHECK(diff > 1e-6);
  }

  TEST_CASE("task losses at analytic points") {
    for (std::size_t k : {2u, 4u, 7u}) {
      TaskDef t = make_task("x", 2, TaskType::single_label, k, {1, 4, 4}, "m", "b");
      for (int label = 0; label < static_cast<int>(k); ++label) {
        Tensor loss = task_loss(Tensor::zeros({1, k}), make_targets({label}, t), TaskType::single_label);
        CHECK(std::abs(loss.item() - std::log(static_cast<double>(k))) <= 1e-12);
      }
    }
    TaskDef bin = make_task("x", 2, TaskType::binary, 2, {1, 4, 4}, "m", "b");
    CHECK(task_loss(Tensor::full({1, 1}, 20.0), make_targets({1}, bin), TaskType::binary).item() < 1e-8);
    TaskDef ord = make_task("x", 2, TaskType::ordinal, 5, {1, 4, 4}, "m", "b");
    CHECK(task_loss(Tensor::zeros({1, 1}), make_targets({2}, ord), TaskType::ordinal).item() == 0.0);
    CHECK_THROWS_AS(make_targets({4}, make_task("x", 2, TaskType::single_label, 4, {1, 4, 4}, "m", "b")), LabelError);
    CHECK_THROWS_AS(make_targets({-1}, bin), LabelError);
  }

  TEST_CASE("losses are nonnegative and decode follows argmax") {
    Rng rng(9);
    for (const auto &t : demo_tasks()) {
      for (int trial = 0; trial < 10; ++trial) {
        Tensor logits = randn({4, t.out_dim()}, rng, 3.0);
        std::vector<int> labels;
        for (std::size_t i = 0; i < 4 * t.label_width(); ++i) {
          labels.push_back(static_cast<int>(rng.index(t.type == TaskType::multi_label ? 2 : t.num_classes)));
        }
        CHECK(task_loss(logits, make_targets(labels, t), t.type).item() >= 0.0);
        if (t.type == TaskType::single_label) {
          auto pred = decode(logits, t);
          Tensor probs = ops::softmax(logits, -1);
          auto pred2 = decode(probs, t);
          CHECK(pred == pred2);
        }
      }
    }
    TaskDef ord = make_task("x", 2, TaskType::ordinal, 5, {1, 4, 4}, "m", "b");
    CHECK(decode(Tensor::zeros({1, 1}), ord) == std::vector<int>{2});
  }

  TEST_CASE("errors: input shape, routing, unknown latents") {
    auto tasks = demo_tasks();
    Medformer m(tiny(), demo_latents(), tasks, 10);
    CHECK_THROWS_AS(m.forward(Tensor::zeros({2, 1, 9, 9}), m.task("a_binary")), InputError);
    TaskDef foreign = m.task("a_binary");
    foreign.head_id = "b_multiclass";
    CHECK_THROWS_AS(m.output_adaptformer(Tensor::zeros({2, 4, 12}), foreign), RoutingError);
    TaskDef bad = tasks[0];
    bad.name = "zzz";
    bad.task_latent = "nope";
    CHECK_THROWS_AS(m.add_task(bad), ConfigError);
  }

  TEST_CASE("a step on one task touches only its latents and head") {
    auto tasks = demo_tasks();
    Medformer m(tiny(), demo_latents(), tasks, 11);
    Rng rng(11);
    randomize(m, rng);
    for (const auto &t : tasks) {
      CAPTURE(t.name);
      for (auto &p : m.parameters()) p.tensor.zero_grad();
      Shape s = t.input_shape;
      s.insert(s.begin(), 3);
      Tensor x = rand_uniform(s, rng, 0.0, 1.0);
      std::vector<int> labels;
      for (std::size_t i = 0; i < 3 * t.label_width(); ++i) labels.push_back(static_cast<int>(rng.index(2)));
      {
        GradTape tape;
        TapeScope scope(tape);
        backward(task_loss(m.forward(x, t), make_targets(labels, t), t.type), tape);
      }
      for (const auto &p : m.parameters()) {
        const bool nz = any_nonzero(p.tensor.grad());
        if (p.name.rfind("latent.", 0) == 0) {
          const bool mine = p.name == "latent.dimension." + t.dim_latent ||
                            p.name == "latent.modality." + t.modality_latent ||
                            p.name == "latent.body_part." + t.body_latent || p.name == "latent.task." + t.task_latent;
          CAPTURE(p.name);
          CHECK(nz == mine);
        } else if (Medformer::is_head_param(p.name)) {
          const bool mine = p.name.rfind("head." + t.head_id + ".", 0) == 0;
          CAPTURE(p.name);
          CHECK(nz == mine);
        }
      }
    }
  }

  TEST_CASE("layer groups partition every parameter exactly once") {
    Medformer m(tiny(), demo_latents(), demo_tasks(), 12);
    m.ensure_expander();
    auto groups = m.layer_groups();
    CHECK(groups.size() == 1 + 1 + 1 + 1 + 1);
    std::vector<std::string> names;
    for (const auto &g : groups) {
      for (const auto &p : g) names.push_back(p.name);
    }
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(std::any_of(groups[3].begin(), groups[3].end(), [](const NamedTensor &p) { return p.name == "latent.task.a_binary"; }));
    CHECK(std::any_of(groups[0].begin(), groups[0].end(), [](const NamedTensor &p) { return p.name == "latent.modality.ct_scan"; }));
  }

  TEST_CASE("shape contract over a fixture table") {
    struct Row {
      std::size_t dims;
      Shape shape;
      std::size_t patch;
    };
    const Row rows[] = {{2, {1, 28, 28}, 4}, {2, {3, 28, 28}, 4}, {2, {1, 10, 6}, 4},
                        {3, {1, 16, 16, 16}, 4}, {3, {1, 8, 8, 8}, 8}, {2, {1, 5, 5}, 2}};
    Rng rng(13);
    for (const auto &r : rows) {
      ModelConfig c = tiny();
      c.patch_size = r.patch;
      TaskDef t = make_task("b_multiclass", r.dims, TaskType::single_label, 4, r.shape,
                             r.dims == 2 ? "microscopic" : "ct_scan", "tissue");
      Medformer m(c, demo_latents(), {t}, 1);
      Shape s = r.shape;
      s.insert(s.begin(), 2);
      CHECK(m.forward(rand_uniform(s, rng, 0.0, 1.0), t).shape() == Shape{2, 4});
    }
  }
}

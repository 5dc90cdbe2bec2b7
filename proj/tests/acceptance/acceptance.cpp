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
// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--only N` (repeatable) restricts the run.
#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mdf/augment.hpp"
#include "mdf/checkpoint.hpp"
#include "mdf/data.hpp"
#include "mdf/error.hpp"
#include "mdf/gradcheck.hpp"
#include "mdf/metrics.hpp"
#include "mdf/ops.hpp"
#include "mdf/ssl.hpp"
#include "mdf/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mdf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char *title;
  double limit_s;  // 0: no limit
  std::function<Outcome()> run;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string scratch_dir(const std::string &name) {
  const auto p = fs::temp_directory_path() / "mdf_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> values(const Tensor &t) { return {t.data().begin(), t.data().end()}; }

/// hidden 32 with 2 + 2 + 2 layers; everything else from the small preset.
ModelConfig desk_config() {
  ModelConfig c = ModelConfig::small();
  c.hidden_dim = 32;
  c.adapt_in_layers = 2;
  c.main_layers = 2;
  c.adapt_out_layers = 2;
  c.expander_widths = {128, 128};
  return c;
}

LatentsConfig suite_latents() {
  LatentsConfig l;
  l[LatentCategory::dimension] = {"2d_latent", "3d_latent"};
  l[LatentCategory::modality] = {"chest_xray", "microscopic", "ct_scan"};
  l[LatentCategory::body_part] = {"chest", "tissue", "abdominal"};
  l[LatentCategory::task] = {"flat_binary", "flat_quad", "vol_binary"};
  return l;
}

/// 2D binary 28^2, 2D 4-class 28^2, 3D binary 16^3.
std::vector<TaskDef> suite_tasks() {
  auto a = test::make_task("flat_binary", 2, TaskType::binary, 2, {1, 28, 28}, "chest_xray", "chest");
  auto b = test::make_task("flat_quad", 2, TaskType::single_label, 4, {1, 28, 28}, "microscopic", "tissue");
  auto c = test::make_task("vol_binary", 3, TaskType::binary, 2, {1, 16, 16, 16}, "ct_scan", "abdominal");
  b.task_id = 1;
  c.task_id = 2;
  return {a, b, c};
}

Dataset synth(const TaskDef &tdef, std::size_t per_class, std::uint64_t seed, double noise = 0.05) {
  SynthConfig s;
  s.input_shape = tdef.input_shape;
  s.num_classes = tdef.num_classes;
  s.samples_per_class = per_class;
  s.noise = noise;
  s.seed = seed;
  return synth_dataset(s, tdef);
}

// ---- 1 -------------------------------------------------------------------

Outcome gradient_suite() {
  std::size_t ops_checked = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto &c : test::gradient_suite()) {
    const double e = test::run_gradient_case(c, 20, 1234);
    ++ops_checked;
    if (e > worst || std::isnan(e)) {
      worst = std::isnan(e) ? INFINITY : e;
      worst_name = c.name;
    }
  }
  Rng rng(77);
  const std::pair<const char *, std::function<Tensor(const std::vector<Tensor> &)>> losses[] = {
      {"vicreg", [](const std::vector<Tensor> &in) { return vicreg_loss(in[0], in[1]).total; }},
      {"barlow_twins", [](const std::vector<Tensor> &in) { return barlow_twins_loss(in[0], in[1], 0.05); }},
  };
  for (const auto &[name, fn] : losses) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto r = grad_check(fn, {randn({8, 5}, rng), randn({8, 5}, rng)});
      if (r.max_rel_err > worst || std::isnan(r.max_rel_err)) {
        worst = std::isnan(r.max_rel_err) ? INFINITY : r.max_rel_err;
        worst_name = name;
      }
    }
    ++ops_checked;
  }
  return {worst <= 1e-4, std::to_string(ops_checked) + " cases x 20 trials, worst rel err " + fmt("%.2e", worst) +
                             " (" + worst_name + ")"};
}

// ---- 2 -------------------------------------------------------------------

Outcome analytic_zeros() {
  // Columns 1..4 of an 8x8 Hadamard matrix, scaled to unit unbiased std.
  std::vector<double> h(8 * 4);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const int bits = __builtin_popcount(static_cast<unsigned>(r & (c + 1)));
      h[r * 4 + c] = (bits % 2 == 0 ? 1.0 : -1.0) * std::sqrt(7.0 / 8.0);
    }
  const Tensor w = Tensor::from({8, 4}, h);
  const double vic = vicreg_loss(w, w).total.item();
  const double bt = barlow_twins_loss(w, w).item();
  double ce_worst = 0.0;
  for (std::size_t k = 2; k <= 10; ++k) {
    std::vector<int> labels(6);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % k);
    TaskDef tdef = test::make_task("u", 2, TaskType::single_label, k, {1, 4, 4}, "m", "b");
    const double ce = task_loss(Tensor::zeros({6, k}), make_targets(labels, tdef), TaskType::single_label).item();
    ce_worst = std::max(ce_worst, std::abs(ce - std::log(static_cast<double>(k))));
  }
  const bool ok = std::abs(vic) <= 1e-8 && std::abs(bt) <= 1e-8 && ce_worst <= 1e-8;
  return {ok, "vicreg " + fmt("%.1e", vic) + ", barlow " + fmt("%.1e", bt) + ", |ce - ln k| " + fmt("%.1e", ce_worst)};
}

// ---- 3 -------------------------------------------------------------------

Outcome overfit() {
  LatentsConfig l = suite_latents();
  const TaskDef tdef = suite_tasks()[0];
  Medformer m(desk_config(), l, {tdef}, 5);
  const Dataset d = synth(tdef, 32, 6);
  TrainConfig tc;
  tc.steps = 500;
  tc.batch_size = 16;
  tc.lr = 1e-3;
  tc.eval_every = 10;
  tc.eval_on_train = true;
  tc.stop_at_accuracy = 1.0;
  tc.seed = 7;
  const RunReport rep = train(m, {{d, {}}}, tc);
  const double acc = evaluate(m, d).metrics.accuracy;
  return {acc == 1.0 && rep.steps_run <= 500,
          std::to_string(d.size()) + " samples, train accuracy " + fmt("%.3f", acc) + " at step " +
              std::to_string(rep.steps_run)};
}

// ---- 4 -------------------------------------------------------------------

Outcome multitask() {
  const auto tasks = suite_tasks();
  Medformer m(desk_config(), suite_latents(), tasks, 11);
  std::vector<TaskData> data;
  for (std::size_t i = 0; i < tasks.size(); ++i) data.push_back({synth(tasks[i], 64 / tasks[i].num_classes, 20 + i), {}});
  std::vector<double> before;
  for (const auto &td : data) before.push_back(evaluate(m, td.train).loss);
  TrainConfig tc;
  tc.steps = 300;
  tc.batch_size = 16;
  tc.batch_size_3d = 16;
  tc.lr = 1e-3;
  tc.audit_every = 1;
  tc.seed = 12;
  const RunReport rep = train(m, data, tc);
  bool drops = true;
  std::string detail;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const double after = evaluate(m, data[i].train).loss;
    const double ratio = after / before[i];
    drops = drops && ratio <= 0.5;
    detail += tasks[i].name + " " + fmt("%.3f", before[i]) + "->" + fmt("%.3f", after) + ", ";
  }
  const bool audit_ok = rep.audit_violations == 0 && rep.audited_steps == tc.steps - 1;
  detail += "audited " + std::to_string(rep.audited_steps) + " steps, " + std::to_string(rep.audit_violations) +
            " violations";
  if (!rep.audit_messages.empty()) detail += " (" + rep.audit_messages.front() + ")";
  return {drops && audit_ok, detail};
}

// ---- 5 -------------------------------------------------------------------

std::size_t steps_to(Medformer &m, const Dataset &d, std::uint64_t seed, std::size_t budget) {
  TrainConfig tc;
  tc.steps = budget;
  tc.batch_size = 16;
  tc.lr = 1e-3;
  tc.eval_every = 5;
  tc.eval_on_train = true;
  tc.stop_at_accuracy = 0.9;
  tc.seed = seed;
  const RunReport rep = train(m, {{d, {}}}, tc);
  for (const auto &r : rep.records) {
    if (r.kind == "eval" && r.accuracy && *r.accuracy >= 0.9) return r.step;
  }
  return budget + 1;
}

AugPipeline ssl_views();

Outcome ssl_direction() {
  const auto tasks = suite_tasks();
  const TaskDef &target = tasks[1];
  const std::size_t budget = 300;
  std::vector<std::size_t> scratch, tuned;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Dataset d = synth(target, 16, 100 + seed);
    Medformer base(desk_config(), suite_latents(), {target}, seed);
    scratch.push_back(steps_to(base, d, seed, budget));

    Medformer pre(desk_config(), suite_latents(), {target}, seed);
    SslTrainConfig sc;
    sc.steps = 200;
    sc.batch_size = 16;
    sc.lr = 1e-3;
    sc.seed = seed;
    sc.ssl.pipeline = ssl_views();
    sc.out_dir = scratch_dir("ssl_seed" + std::to_string(seed));
    train_ssl(pre, {d}, sc);
    Medformer ft(desk_config(), suite_latents(), {target}, seed);
    load_trunk_into(ft, sc.out_dir + "/" + sc.checkpoint_name);
    tuned.push_back(steps_to(ft, d, seed, budget));
    detail += "seed " + std::to_string(seed) + ": " + std::to_string(scratch.back()) + " vs " +
              std::to_string(tuned.back()) + "; ";
  }
  auto median = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v[1];
  };
  const std::size_t ms = median(scratch), mt = median(tuned);
  detail += "median steps to 90%: scratch " + std::to_string(ms) + ", pretrained " + std::to_string(mt);
  return {mt <= ms, detail};
}

// ---- 6 -------------------------------------------------------------------

Outcome csa() {
  const auto sched = cascade_schedule(8);
  const bool sched_ok = sched == std::vector<std::size_t>{8, 4, 2, 1};

  Medformer m(test::tiny(), test::demo_latents(), test::demo_tasks(), 31);
  const TaskDef &tdef = m.task("b_multiclass");
  auto [tr, va] = split_off(synth(tdef, 8, 32), 0.25, 33);
  TrainConfig tc;
  tc.steps = 8;
  tc.batch_size = 8;
  tc.eval_every = 4;
  tc.seed = 34;
  tc.out_dir = scratch_dir("csa");
  const CsaReport rep = run_csa(m, {{tr, va}}, tc, 8);
  // Lineage from the files on disk, independent of the in-memory report.
  bool lineage = rep.stages.size() == 4;
  for (std::size_t s = 1; lineage && s < rep.stages.size(); ++s) {
    const std::size_t k = rep.stages[s - 1].k;
    const std::string prev = tc.out_dir + "/k" + std::to_string(k) + "/csa_k" + std::to_string(k) + ".ckpt";
    lineage = fs::exists(prev) && parameter_digest(load_checkpoint(prev)) == rep.stages[s].start_digest &&
              rep.stages[s - 1].best_digest == rep.stages[s].start_digest;
  }

  Rng rng(35);
  bool exact = true;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = std::size_t{1} << rng.index(4);
    std::vector<Tensor> xs, ys;
    for (std::size_t i = 0; i < k; ++i) {
      xs.push_back(rand_uniform({2, 6, 6}, rng, 0.0, 1.0));
      ys.push_back(rand_uniform({5}, rng, 0.0, 1.0));
    }
    const auto [xm, ym] = sum_augment(xs, ys);
    for (std::size_t e = 0; e < xm.numel(); ++e) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += xs[i].data()[e];
      exact = exact && xm.data()[e] == s / static_cast<double>(k);
    }
    for (std::size_t e = 0; e < ym.numel(); ++e) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += ys[i].data()[e];
      exact = exact && ym.data()[e] == s / static_cast<double>(k);
    }
  }
  std::string d = "schedule " + std::string(sched_ok ? "[8,4,2,1]" : "wrong") + ", lineage over " +
                  std::to_string(rep.stages.size()) + " stages " + (lineage ? "ok" : "broken") +
                  ", sum_augment " + (exact ? "exact" : "differs");
  return {sched_ok && lineage && exact, d};
}

// ---- 7 -------------------------------------------------------------------

Outcome backforward() {
  test::LinearFixture f;
  const auto x = values(f.x), y = values(f.y), w1 = values(f.w1), w2 = values(f.w2);
  test::RecordingSgd opt;
  const double lr = 0.1;
  const StepStats st = backforward_step({{{"w1", f.w1}}, {{"w2", f.w2}}}, [&] { return f.loss(); }, opt, lr, 0.0);
  std::vector<double> g1, g2, g1b, g2b;
  test::linear_grads(x, y, w1, w2, g1, g2);
  std::vector<double> w1_new(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) w1_new[i] = w1[i] - lr * g1[i];
  test::linear_grads(x, y, w1_new, w2, g1b, g2b);
  double err = 0.0;
  for (std::size_t i = 0; i < g2b.size(); ++i) err = std::max(err, std::abs(opt.applied["w2"][i] - g2b[i]));
  for (std::size_t i = 0; i < g1.size(); ++i) err = std::max(err, std::abs(opt.applied["w1"][i] - g1[i]));
  const bool counts2 = st.forward_passes == 2 && st.backward_passes == 2;

  // n = 1 against a standard step, five AdamW updates.
  test::LinearFixture a, b;
  AdamW oa, ob;
  const ParamList pa{{"w1", a.w1}, {"w2", a.w2}}, pb{{"w1", b.w1}, {"w2", b.w2}};
  bool same = true;
  for (int s = 0; s < 5; ++s) {
    const auto sa = standard_step(pa, [&] { return a.loss(); }, oa, 0.01);
    const auto sb = backforward_step({pb}, [&] { return b.loss(); }, ob, 0.01);
    same = same && sa.loss == sb.loss && sb.forward_passes == 1 && sb.backward_passes == 1;
  }
  same = same && values(a.w1) == values(b.w1) && values(a.w2) == values(b.w2);

  // Pass counts on a full model equal its layer-group count.
  Medformer m(test::tiny(), test::demo_latents(), test::demo_tasks(), 41);
  const TaskDef &tdef = m.task("a_binary");
  const Dataset d = synth(tdef, 2, 42);
  const Tensor targets = make_targets(d.labels, tdef);
  AdamW om;
  const auto groups = m.layer_groups();
  const StepStats sm = backforward_step(groups, [&] { return task_loss(m.forward(d.images, tdef), targets, tdef.type); },
                                        om, 1e-3);
  const bool counts_model = sm.forward_passes == groups.size() && sm.backward_passes == groups.size();
  return {err <= 1e-12 && counts2 && same && counts_model,
          "max |applied - oracle| " + fmt("%.1e", err) + ", n=1 " + (same ? "bit-exact" : "differs") + ", passes " +
              std::to_string(sm.forward_passes) + "/" + std::to_string(sm.backward_passes) + " for " +
              std::to_string(groups.size()) + " layer groups"};
}

// ---- 8 -------------------------------------------------------------------

Outcome metrics() {
  Rng rng(51);
  int exact = 0, ties_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.index(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.index(8)) / 4.0;  // coarse grid forces ties
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) ++ties_seen;
    if (auc(scores, labels) == test::auc_pair_oracle(scores, labels)) ++exact;
  }
  bool acc_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    std::vector<int> p(n), l(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.index(4));
      l[i] = static_cast<int>(rng.index(4));
      hits += p[i] == l[i];
    }
    acc_exact = acc_exact && accuracy(p, l) == static_cast<double>(hits) / static_cast<double>(n);
  }
  return {exact == 100 && acc_exact, std::to_string(exact) + "/100 auc sets exact (" + std::to_string(ties_seen) +
                                         " with ties), accuracy " + (acc_exact ? "exact" : "differs")};
}

// ---- 9 -------------------------------------------------------------------

Outcome persistence() {
  const std::string dir = scratch_dir("persist");
  Medformer m(test::tiny(DType::f32), test::demo_latents(), test::demo_tasks(), 61);
  m.ensure_expander();
  Rng rng(62);
  test::randomize(m, rng, 0.1);
  save_checkpoint(dir + "/a.ckpt", m);
  const Medformer back = load_checkpoint(dir + "/a.ckpt");
  save_checkpoint(dir + "/b.ckpt", back);
  const bool bytes_same = slurp(dir + "/a.ckpt") == slurp(dir + "/b.ckpt");
  int probes_exact = 0;
  for (int p = 0; p < 10; ++p) {
    const TaskDef &tdef = m.tasks()[static_cast<std::size_t>(p) % m.tasks().size()];
    Shape shape = tdef.input_shape;
    shape.insert(shape.begin(), 3);
    const Tensor x = rand_uniform(shape, rng, 0.0, 1.0, DType::f32);
    if (values(m.forward(x, tdef)) == values(back.forward(x, tdef))) ++probes_exact;
  }

  // SSL checkpoint into a fresh fine-tune model.
  Medformer ssl(test::tiny(), test::demo_latents(), test::demo_tasks(), 63);
  ssl.ensure_expander();
  test::randomize(ssl, rng, 0.1);
  save_checkpoint(dir + "/ssl.ckpt", ssl);
  Medformer ft(test::tiny(), test::demo_latents(), test::demo_tasks(), 64);
  const Medformer fresh(test::tiny(), test::demo_latents(), test::demo_tasks(), 64);
  load_trunk_into(ft, dir + "/ssl.ckpt");
  std::map<std::string, std::vector<double>> src, init;
  for (const auto &p : ssl.parameters()) src[p.name] = values(p.tensor);
  for (const auto &p : fresh.parameters()) init[p.name] = values(p.tensor);
  std::size_t trunk = 0, trunk_equal = 0, heads = 0, heads_fresh = 0;
  for (const auto &p : ft.parameters()) {
    if (is_trunk_param(p.name)) {
      ++trunk;
      trunk_equal += values(p.tensor) == src.at(p.name);
    } else {
      ++heads;
      heads_fresh += values(p.tensor) == init.at(p.name);
    }
  }
  const bool ok = bytes_same && probes_exact == 10 && trunk == trunk_equal && heads == heads_fresh && trunk > 0;
  return {ok, std::string("round trip ") + (bytes_same ? "byte-identical" : "differs") + ", " +
                  std::to_string(probes_exact) + "/10 probes bit-exact, trunk " + std::to_string(trunk_equal) + "/" +
                  std::to_string(trunk) + " equal, heads " + std::to_string(heads_fresh) + "/" +
                  std::to_string(heads) + " fresh"};
}

// ---- 10 ------------------------------------------------------------------

std::vector<double> bytes_of(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto &x : v) x = static_cast<double>(rng.index(256));
  return v;
}

std::vector<ZipEntry> archive_entries(const Shape &img_shape, const std::vector<double> &img,
                                      const std::vector<double> &labels) {
  std::vector<ZipEntry> out;
  for (const char *s : {"train", "val", "test"}) {
    out.push_back({std::string(s) + "_images.npy", encode_npy("|u1", img_shape, img)});
    out.push_back({std::string(s) + "_labels.npy", encode_npy("|u1", {img_shape[0], 1}, labels)});
  }
  return out;
}

std::string real_archive_path;
std::string real_archive_dataset;

Outcome ingestion() {
  const std::string dir = scratch_dir("ingest");
  struct Fixture {
    const char *name;
    TaskDef tdef;
    Shape stored;
  };
  const Fixture fixtures[] = {
      {"gray2d", test::make_task("g", 2, TaskType::binary, 2, {1, 28, 28}, "m", "b"), {3, 28, 28}},
      {"rgb2d", test::make_task("c", 2, TaskType::single_label, 9, {3, 28, 28}, "m", "b"), {3, 28, 28, 3}},
      {"vol3d", test::make_task("v", 3, TaskType::binary, 2, {1, 28, 28, 28}, "m", "b"), {2, 28, 28, 28}},
  };
  int exact = 0;
  for (const auto &f : fixtures) {
    std::size_t n = 1;
    for (auto s : f.stored) n *= s;
    const auto px = bytes_of(n, fnv1a(f.name));
    std::vector<double> labels(f.stored[0]);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<double>(i % f.tdef.num_classes);
    const std::string path = dir + "/" + f.name + ".zip";
    write_zip(path, archive_entries(f.stored, px, labels), true);
    const DatasetSplits s = load_medmnist_archive(path, f.tdef);
    // Expected layout computed here: channel-last RGB goes channel-first.
    bool ok = s.train.size() == f.stored[0] && s.val.size() == f.stored[0] && s.test.size() == f.stored[0];
    const auto got = s.test.images.data();
    const std::size_t c = f.tdef.input_shape[0];
    const std::size_t plane = n / f.stored[0] / c;
    for (std::size_t i = 0; ok && i < f.stored[0]; ++i)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t q = 0; q < plane; ++q) {
          const double raw = c == 1 ? px[i * plane + q] : px[(i * plane + q) * c + ch];
          const double v = got[(i * c + ch) * plane + q];
          ok = ok && v == raw / 255.0 && static_cast<double>(std::lround(v * 255.0)) == raw;
        }
    for (std::size_t i = 0; i < labels.size(); ++i) ok = ok && s.train.labels[i] == static_cast<int>(labels[i]);
    exact += ok;
  }

  // Malformed archives must name the broken entry.
  const auto gray = fixtures[0];
  const auto px = bytes_of(3 * 28 * 28, 79);
  const auto good = archive_entries({3, 28, 28}, px, {0, 1, 0});
  std::vector<std::pair<std::string, std::vector<ZipEntry>>> broken;
  auto missing = good;
  missing.erase(missing.begin() + 3);
  broken.push_back({"val_labels", missing});
  auto magic = good;
  magic[2].data[1] = 'X';
  broken.push_back({"val_images", magic});
  auto dtype = good;
  dtype[4].data = encode_npy("<f8", {3, 28, 28}, px);  // floats outside [0, 1]
  broken.push_back({"test_images", dtype});
  auto cplx = good;
  cplx[0].data = encode_npy("|u1", {3, 28, 28}, px);
  cplx[0].data.replace(cplx[0].data.find("|u1"), 3, "<c8");
  broken.push_back({"train_images", cplx});
  auto shape = good;
  shape[0].data = encode_npy("|u1", {3, 27, 28}, bytes_of(3 * 27 * 28, 80));
  broken.push_back({"train_images", shape});
  auto label = good;
  label[5].data = encode_npy("|u1", {3, 1}, {0, 1, 2});
  broken.push_back({"test_labels", label});
  int named = 0;
  for (const auto &[entry, entries] : broken) {
    const std::string path = dir + "/broken.zip";
    write_zip(path, entries);
    try {
      load_medmnist_archive(path, gray.tdef);
    } catch (const IngestionError &e) {
      named += std::string(e.what()).find(entry) != std::string::npos;
    }
  }

  std::string real = "no real archive supplied";
  bool real_ok = true;
  if (!real_archive_path.empty()) {
    try {
      LatentsConfig lat = medmnist_latents();
      const RegistryRow &row = registry_row(real_archive_dataset);
      const TaskDef tdef = task_registry(lat, {row}).front();
      DatasetSplits s = load_medmnist_archive(real_archive_path, tdef);
      Medformer pre(desk_config(), lat, {tdef}, 80);
      SslTrainConfig sc;
      sc.steps = 10;
      sc.batch_size = tdef.dims == 3 ? 4 : 16;
      sc.seed = 80;
      sc.out_dir = scratch_dir("real_ssl");
      train_ssl(pre, {s.train}, sc);
      Medformer m(desk_config(), lat, {tdef}, 81);
      load_trunk_into(m, sc.out_dir + "/" + sc.checkpoint_name);
      TrainConfig tc;
      tc.steps = 50;
      tc.batch_size = 16;
      tc.batch_size_3d = 4;
      tc.seed = 82;
      const RunReport rep = train(m, {{s.train, {}}}, tc);
      real = "real archive " + real_archive_dataset + ": " + std::to_string(rep.steps_run) + " fine-tune steps ok";
      real_ok = rep.steps_run == 50;
    } catch (const std::exception &e) {
      real = std::string("real archive run failed: ") + e.what();
      real_ok = false;
    }
  }
  const int n_broken = static_cast<int>(broken.size());
  return {exact == 3 && named == n_broken && real_ok,
          std::to_string(exact) + "/3 fixtures bit-exact, " + std::to_string(named) + "/" + std::to_string(n_broken) +
              " malformed entries named, " + real};
}

// Intensity jitter only.
AugPipeline ssl_views() {
  AugStep j;
  j.kind = AugStep::Kind::jitter;
  j.p = 1.0;
  j.sigma = 0.1;
  AugPipeline p;
  p.steps = {j};
  return p;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  app.add_option("--archive", real_archive_path, "Local MedMNIST archive for the optional ingestion run");
  app.add_option("--dataset", real_archive_dataset, "Registry name of --archive, e.g. pathmnist");
  CLI11_PARSE(app, argc, argv);
  if (real_archive_path.empty()) {
    if (const char *p = std::getenv("MEDFORMER_ARCHIVE")) real_archive_path = p;
    if (const char *d = std::getenv("MEDFORMER_ARCHIVE_DATASET")) real_archive_dataset = d;
  }
  if (!real_archive_path.empty() && real_archive_dataset.empty()) {
    real_archive_dataset = fs::path(real_archive_path).stem().string();
  }

  const std::vector<Criterion> all = {
      {1, "gradient suite incl. both ssl losses", 120.0, gradient_suite},
      {2, "analytic zero cases", 0.0, analytic_zeros},
      {3, "overfit smoke", 120.0, overfit},
      {4, "multi-task routing", 0.0, multitask},
      {5, "ssl -> fine-tune direction", 0.0, ssl_direction},
      {6, "cascading sum augmentation", 0.0, csa},
      {7, "backforward correctness", 0.0, backforward},
      {8, "metrics oracle", 0.0, metrics},
      {9, "persistence", 0.0, persistence},
      {10, "ingestion", 0.0, ingestion},
  };
  int failed = 0;
  for (const auto &c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_s) + " s limit";
    }
    failed += !o.pass;
    std::printf("%s  %2d  %-38s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

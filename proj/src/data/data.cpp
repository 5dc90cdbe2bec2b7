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
#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "mdf/data.hpp"
#include "mdf/error.hpp"

namespace mdf {

Tensor Dataset::gather_images(const std::vector<std::size_t> &rows) const {
  const std::size_t per = images.numel() / std::max<std::size_t>(1, size());
  Shape shape = images.shape();
  shape[0] = rows.size();
  std::vector<double> out(rows.size() * per);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw InputError("row " + std::to_string(rows[i]) + " out of range");
    std::copy_n(images.data().begin() + rows[i] * per, per, out.begin() + i * per);
  }
  return Tensor::from(shape, std::move(out), images.dtype());
}

std::vector<int> Dataset::gather_labels(const std::vector<std::size_t> &rows) const {
  const std::size_t w = tdef.label_width();
  std::vector<int> out;
  out.reserve(rows.size() * w);
  for (std::size_t r : rows) {
    if (r >= size()) throw InputError("row " + std::to_string(r) + " out of range");
    out.insert(out.end(), labels.begin() + r * w, labels.begin() + (r + 1) * w);
  }
  return out;
}

void Dataset::validate() const {
  if (!images.defined()) throw InputError(tdef.name + "/" + split + ": no images");
  Shape sample(images.shape().begin() + 1, images.shape().end());
  if (sample != tdef.input_shape) {
    throw InputError(tdef.name + "/" + split + ": samples are " + shape_str(sample) + ", task expects " +
                     shape_str(tdef.input_shape));
  }
  if (labels.size() != size() * tdef.label_width()) {
    throw LabelError(tdef.name + "/" + split + ": " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(size()) + " samples");
  }
  const int hi = tdef.type == TaskType::multi_label ? 1 : static_cast<int>(tdef.num_classes) - 1;
  for (int v : labels) {
    if (v < 0 || v > hi) throw LabelError(tdef.name + "/" + split + ": label " + std::to_string(v) + " out of range");
  }
}

std::pair<Dataset, Dataset> split_off(const Dataset &ds, double frac, std::uint64_t seed, const std::string &name) {
  if (!(frac > 0 && frac < 1)) throw ParameterError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(std::llround(frac * static_cast<double>(ds.size())));
  std::vector<std::size_t> held(order.begin(), order.begin() + cut), kept(order.begin() + cut, order.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());
  Dataset a = ds, b = ds;
  a.images = ds.gather_images(kept);
  a.labels = ds.gather_labels(kept);
  b.images = ds.gather_images(held);
  b.labels = ds.gather_labels(held);
  b.split = name;
  return {a, b};
}

// ---- archives ---------------------------------------------------------

namespace {

const ZipEntry *find_entry(const std::vector<ZipEntry> &entries, const std::string &stem) {
  for (const auto &e : entries) {
    std::string n = e.name;
    const auto slash = n.find_last_of('/');
    if (slash != std::string::npos) n = n.substr(slash + 1);
    if (n == stem || n == stem + ".npy") return &e;
  }
  return nullptr;
}

Dataset load_split(const std::vector<ZipEntry> &entries, const std::string &split, const TaskDef &tdef,
                   const std::string &path) {
  const std::string img_name = split + "_images", lab_name = split + "_labels";
  const ZipEntry *ie = find_entry(entries, img_name);
  const ZipEntry *le = find_entry(entries, lab_name);
  if (!ie) throw IngestionError(path + ": missing entry '" + img_name + "'");
  if (!le) throw IngestionError(path + ": missing entry '" + lab_name + "'");
  NpyArray img = parse_npy(ie->data, img_name);
  NpyArray lab = parse_npy(le->data, lab_name);

  const std::size_t c = tdef.channels();
  const Shape spatial(tdef.input_shape.begin() + 1, tdef.input_shape.end());
  if (img.shape.empty()) throw IngestionError(img_name + ": scalar array");
  const std::size_t n = img.shape[0];
  const Shape rest(img.shape.begin() + 1, img.shape.end());
  Shape channel_last = spatial;
  channel_last.push_back(c);
  bool move_channels = false;
  if (rest == channel_last) {
    move_channels = c > 1;
  } else if (!(c == 1 && rest == spatial) && rest != tdef.input_shape) {
    throw IngestionError(img_name + ": shape " + shape_str(img.shape) + " does not match task " + tdef.name + " " +
                         shape_str(tdef.input_shape));
  }
  const bool bytes = img.descr.substr(1) == "u1";
  std::vector<double> px(img.values.size());
  const std::size_t hw = img.values.size() / std::max<std::size_t>(1, n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t src = move_channels ? (i * hw + p) * c + ch : (i * c + ch) * hw + p;
        double v = img.values[src];
        if (bytes) v /= 255.0;
        else if (!(v >= 0.0 && v <= 1.0)) throw IngestionError(img_name + ": value outside [0, 1]");
        px[(i * c + ch) * hw + p] = v;
      }
    }
  }

  const std::size_t w = tdef.label_width();
  const bool ok_shape = (lab.shape.size() == 1 && w == 1 && lab.shape[0] == n) ||
                        (lab.shape.size() == 2 && lab.shape[0] == n && lab.shape[1] == w);
  if (!ok_shape) {
    throw IngestionError(lab_name + ": shape " + shape_str(lab.shape) + " does not fit " + std::to_string(n) +
                         " samples of width " + std::to_string(w));
  }
  Dataset ds;
  ds.split = split;
  ds.tdef = tdef;
  Shape full = tdef.input_shape;
  full.insert(full.begin(), n);
  ds.images = Tensor::from(full, std::move(px));
  ds.labels.reserve(lab.values.size());
  const double hi = tdef.type == TaskType::multi_label ? 1.0 : static_cast<double>(tdef.num_classes - 1);
  for (double v : lab.values) {
    if (v != std::floor(v) || v < 0 || v > hi) {
      throw IngestionError(lab_name + ": label value " + std::to_string(v) + " invalid for " + tdef.name);
    }
    ds.labels.push_back(static_cast<int>(v));
  }
  return ds;
}

}  // namespace

DatasetSplits load_medmnist_archive(const std::string &path, const TaskDef &tdef) {
  tdef.validate();
  const auto entries = read_zip(path);
  DatasetSplits s;
  s.train = load_split(entries, "train", tdef, path);
  s.val = load_split(entries, "val", tdef, path);
  s.test = load_split(entries, "test", tdef, path);
  return s;
}

// ---- synthetic --------------------------------------------------------

Tensor synth_template(const Shape &input_shape, std::size_t cls, std::size_t num_classes) {
  if (input_shape.size() != 3 && input_shape.size() != 4) throw InputError("synth_template: bad input shape");
  if (cls >= num_classes) throw ParameterError("synth_template: class out of range");
  const std::size_t c = input_shape[0];
  const Shape sp(input_shape.begin() + 1, input_shape.end());
  const std::size_t rank = sp.size();
  std::size_t vox = 1;
  for (auto e : sp) vox *= e;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(cls) / static_cast<double>(num_classes);
  const std::size_t bar_axis = cls % rank;
  const double bar_pos = 0.2 + 0.6 * static_cast<double>(cls) / static_cast<double>(num_classes);
  std::vector<double> out(c * vox);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t v = 0; v < vox; ++v) {
    std::vector<double> u(rank);
    for (std::size_t a = 0; a < rank; ++a) u[a] = (static_cast<double>(idx[a]) + 0.5) / static_cast<double>(sp[a]);
    // Blob on a circle around the centre, in the last two axes.
    const double cy = 0.5 + 0.28 * std::sin(angle), cx = 0.5 + 0.28 * std::cos(angle);
    double r2 = (u[rank - 2] - cy) * (u[rank - 2] - cy) + (u[rank - 1] - cx) * (u[rank - 1] - cx);
    if (rank == 3) r2 += (u[0] - (0.3 + 0.4 * bar_pos)) * (u[0] - (0.3 + 0.4 * bar_pos));
    const double blob = std::exp(-r2 / (2.0 * 0.1 * 0.1));
    const double bar = std::abs(u[bar_axis] - bar_pos) < 0.07 ? 1.0 : 0.0;
    const double val = 0.1 + 0.8 * std::max(blob, 0.8 * bar);
    for (std::size_t ch = 0; ch < c; ++ch) out[ch * vox + v] = val * (1.0 - 0.15 * static_cast<double>(ch));
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < sp[a]) break;
      idx[a] = 0;
    }
  }
  return Tensor::from(input_shape, std::move(out));
}

Dataset synth_dataset(const SynthConfig &synth, const TaskDef &tdef) {
  if (synth.input_shape != tdef.input_shape) {
    throw ConfigError("synthetic shape " + shape_str(synth.input_shape) + " differs from task " + tdef.name + " " +
                      shape_str(tdef.input_shape));
  }
  if (synth.num_classes != tdef.num_classes) throw ConfigError("synthetic class count differs from task " + tdef.name);
  if (synth.samples_per_class == 0) throw ConfigError("synthetic dataset needs at least one sample per class");
  if (synth.noise < 0) throw ConfigError("synthetic noise must be nonnegative");
  const std::size_t k = synth.num_classes;
  std::vector<Tensor> templates;
  for (std::size_t c = 0; c < k; ++c) templates.push_back(synth_template(synth.input_shape, c, k));
  const std::size_t n = k * synth.samples_per_class;
  std::vector<std::size_t> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = i % k;
  Rng rng(synth.seed);
  rng.shuffle(cls);
  const std::size_t per = templates[0].numel();
  std::vector<double> px(n * per);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = templates[cls[i]].data();
    for (std::size_t j = 0; j < per; ++j) {
      const double v = synth.noise > 0 ? t[j] + rng.normal(0.0, synth.noise) : t[j];
      px[i * per + j] = std::clamp(v, 0.0, 1.0);
    }
  }
  Dataset ds;
  ds.tdef = tdef;
  Shape full = tdef.input_shape;
  full.insert(full.begin(), n);
  ds.images = Tensor::from(full, std::move(px));
  const std::size_t w = tdef.label_width();
  ds.labels.assign(n * w, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (tdef.type == TaskType::multi_label) ds.labels[i * w + cls[i]] = 1;
    else ds.labels[i] = static_cast<int>(cls[i]);
  }
  return ds;
}

// ---- registry ---------------------------------------------------------

const std::vector<RegistryRow> &medmnist_table() {
  using T = TaskType;
  static const std::vector<RegistryRow> rows = {
      {"pathmnist", 2, "microscopic", "tissue", T::single_label, 9, 3},
      {"chestmnist", 2, "chest_xray", "chest", T::binary, 2, 1},
      {"dermamnist", 2, "microscopic", "skin", T::single_label, 7, 3},
      {"octmnist", 2, "retinal_oct", "retina", T::single_label, 4, 1},
      {"pneumoniamnist", 2, "chest_xray", "chest", T::binary, 2, 1},
      {"retinamnist", 2, "fundus", "retina", T::ordinal, 5, 3},
      {"breastmnist", 2, "ultrasound", "breast", T::binary, 2, 1},
      {"bloodmnist", 2, "microscopic", "blood", T::single_label, 8, 3},
      {"tissuemnist", 2, "microscopic", "tissue", T::single_label, 8, 1},
      {"organamnist", 2, "ct_scan", "abdominal", T::single_label, 11, 1},
      {"organcmnist", 2, "ct_scan", "abdominal", T::single_label, 11, 1},
      {"organsmnist", 2, "ct_scan", "abdominal", T::single_label, 11, 1},
      {"organmnist3d", 3, "ct_scan", "abdominal", T::single_label, 11, 1},
      {"nodulemnist3d", 3, "ct_scan", "chest", T::binary, 2, 1},
      {"adrenalmnist3d", 3, "ct_scan", "abdominal", T::binary, 2, 1},
      {"fracturemnist3d", 3, "ct_scan", "bone", T::single_label, 3, 1},
      {"vesselmnist3d", 3, "mra", "brain", T::binary, 2, 1},
      {"synapsemnist3d", 3, "electron_microscopy", "brain", T::binary, 2, 1},
  };
  return rows;
}

std::string registry_task_latent(const RegistryRow &row) {
  std::string t = task_type_name(row.type);
  t.erase(std::remove(t.begin(), t.end(), '_'), t.end());
  return row.dataset + "_" + t;
}

LatentsConfig medmnist_latents() {
  LatentsConfig cfg;
  cfg[LatentCategory::dimension] = {"2d_latent", "3d_latent"};
  auto add = [](std::vector<std::string> &v, const std::string &s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto &r : medmnist_table()) {
    add(cfg[LatentCategory::modality], r.modality);
    add(cfg[LatentCategory::body_part], r.body_part);
    add(cfg[LatentCategory::task], registry_task_latent(r));
  }
  return cfg;
}

std::vector<TaskDef> task_registry(const LatentsConfig &latents, const std::vector<RegistryRow> &rows,
                                    std::size_t side) {
  std::vector<TaskDef> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    TaskDef t;
    t.task_id = i;
    t.name = r.dataset;
    t.dims = r.dims;
    t.modality = r.modality;
    t.body_part = r.body_part;
    t.type = r.type;
    t.num_classes = r.num_classes;
    t.input_shape = r.dims == 2 ? Shape{r.channels, side, side} : Shape{r.channels, side, side, side};
    t.dim_latent = r.dims == 2 ? "2d_latent" : "3d_latent";
    t.modality_latent = r.modality;
    t.body_latent = r.body_part;
    t.task_latent = registry_task_latent(r);
    t.head_id = r.dataset;
    const std::pair<LatentCategory, const std::string *> refs[] = {{LatentCategory::dimension, &t.dim_latent},
                                                                   {LatentCategory::modality, &t.modality_latent},
                                                                   {LatentCategory::body_part, &t.body_latent},
                                                                   {LatentCategory::task, &t.task_latent}};
    for (const auto &[cat, name] : refs) {
      if (!latents.contains(cat, *name)) {
        throw ConfigError("task " + r.dataset + ": " + category_name(cat) + " latent '" + *name + "' is not declared");
      }
    }
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

const RegistryRow &registry_row(const std::string &dataset) {
  std::string key = dataset;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (const auto &r : medmnist_table()) {
    if (r.dataset == key) return r;
  }
  throw LookupError("unknown MedMNIST dataset '" + dataset + "'");
}

}  // namespace mdf

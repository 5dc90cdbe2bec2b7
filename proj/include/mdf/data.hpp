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
#ifndef MDF_DATA_HPP_
#define MDF_DATA_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdf/latents.hpp"
#include "mdf/random.hpp"
#include "mdf/task.hpp"
#include "mdf/tensor.hpp"

namespace mdf {

struct Dataset {
  std::string split = "train";
  TaskDef tdef;
  Tensor images;            // [N, C, ...spatial], values in [0, 1]
  std::vector<int> labels;  // N * tdef.label_width()

  std::size_t size() const { return images.defined() ? images.dim(0) : 0; }
  Tensor gather_images(const std::vector<std::size_t> &rows) const;
  std::vector<int> gather_labels(const std::vector<std::size_t> &rows) const;
  /// Throws InputError / LabelError on shape or range violations.
  void validate() const;
};

/// Disjoint split: the first round(frac * N) rows of a seeded permutation
/// go to the second dataset (split name `name`).
std::pair<Dataset, Dataset> split_off(const Dataset &ds, double frac, std::uint64_t seed,
                                      const std::string &name = "val");

// ---- .npy -------------------------------------------------------------

struct NpyArray {
  std::string descr;  // e.g. "|u1", "<f4"
  Shape shape;
  bool fortran_order = false;
  std::vector<double> values;  // row-major regardless of fortran_order

  std::size_t numel() const;
};

/// Parses format versions 1-3 with dtypes u1, i1, i4, i8, f4, f8 in either
/// byte order. `entry` names the array in error messages (IngestionError).
NpyArray parse_npy(const std::string &bytes, const std::string &entry = "array");
/// Version 1.0 encoding; values are given row-major and stored in the
/// requested order.
std::string encode_npy(const std::string &descr, const Shape &shape, const std::vector<double> &values,
                       bool fortran_order = false);

// ---- zip --------------------------------------------------------------

struct ZipEntry {
  std::string name;
  std::string data;
};

/// Reads stored and deflated members; CRC-32 is verified.
std::vector<ZipEntry> read_zip(const std::string &path);
void write_zip(const std::string &path, const std::vector<ZipEntry> &entries, bool deflate = false);

// ---- MedMNIST archives ------------------------------------------------

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Zip of {train,val,test}_{images,labels}[.npy]. uint8 images are scaled
/// by 1/255, channel-last RGB is moved to channel-first, and every shape is
/// checked against the task.
DatasetSplits load_medmnist_archive(const std::string &path, const TaskDef &tdef);

// ---- synthetic data ---------------------------------------------------

struct SynthConfig {
  Shape input_shape = {1, 28, 28};  // (C, H, W) or (C, D, H, W)
  std::size_t num_classes = 2;
  std::size_t samples_per_class = 32;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

/// Noise-free class pattern: bars and a blob at class-specific positions.
Tensor synth_template(const Shape &input_shape, std::size_t cls, std::size_t num_classes);
/// Template plus N(0, noise^2), clamped to [0, 1], rows in seeded order.
Dataset synth_dataset(const SynthConfig &synth, const TaskDef &tdef);

// ---- task registry ----------------------------------------------------

struct RegistryRow {
  std::string dataset;  // e.g. "pathmnist"
  std::size_t dims = 2;
  std::string modality;
  std::string body_part;
  TaskType type = TaskType::single_label;
  std::size_t num_classes = 2;
  std::size_t channels = 1;
};

/// The 18 MedMNIST v2 datasets with dimensionality, modality, body part,
/// task type and (editable) class and channel counts.
const std::vector<RegistryRow> &medmnist_table();
/// Latents covering every row of medmnist_table().
LatentsConfig medmnist_latents();
/// Task latent name used for a row, e.g. "pathmnist_singlelabel".
std::string registry_task_latent(const RegistryRow &row);
/// One TaskDef per row with `side`-sized inputs; ConfigError if a latent
/// name is missing from `latents`.
std::vector<TaskDef> task_registry(const LatentsConfig &latents, const std::vector<RegistryRow> &rows,
                                    std::size_t side = 28);
/// Row lookup by dataset name (case-insensitive); LookupError if absent.
const RegistryRow &registry_row(const std::string &dataset);

}  // namespace mdf

#endif  // MDF_DATA_HPP_

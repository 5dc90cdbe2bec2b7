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
#ifndef MDF_TENSOR_HPP_
#define MDF_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mdf {

enum class DType : std::uint8_t { f32, f64 };

const char *dtype_name(DType dt);
DType dtype_from_name(const std::string &name);

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape &shape);
std::string shape_str(const Shape &shape);

/// Rounds a value to the storage precision of `dt`.
inline double round_to(DType dt, double v) {
  return dt == DType::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

struct TensorImpl {
  Shape shape;
  DType dtype = DType::f64;
  // Values are held in double regardless of dtype; f32 tensors keep every
  // element exactly float-representable.
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
  bool is_leaf = true;
};

/// Dense row-major array with an optional gradient. Copies share storage;
/// use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape &shape, DType dt = DType::f64);
  static Tensor ones(const Shape &shape, DType dt = DType::f64);
  static Tensor full(const Shape &shape, double value, DType dt = DType::f64);
  static Tensor scalar(double value, DType dt = DType::f64);
  static Tensor from(const Shape &shape, std::vector<double> values, DType dt = DType::f64);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape &shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(int axis) const;
  std::size_t numel() const;
  DType dtype() const;

  std::span<const double> data() const;
  /// In-place access for optimizers, initializers and data loaders.
  std::span<double> mutable_data();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor &set_requires_grad(bool on = true);
  bool is_leaf() const;

  bool has_grad() const;
  /// Gradient values; all zeros if none has been accumulated.
  std::vector<double> grad() const;
  Tensor grad_tensor() const;
  void zero_grad();
  std::vector<double> &grad_buffer();

  Tensor clone() const;
  Tensor detach() const;
  Tensor to(DType dt) const;

  TensorImpl *impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl> &impl_ptr() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Ordered record of executed differentiable ops. The tape is single-writer;
/// ops record onto the tape installed by the innermost TapeScope of the
/// calling thread.
class GradTape {
 public:
  using BackwardFn = std::function<void(const std::vector<double> &grad_out)>;

  struct Node {
    const char *op;
    std::shared_ptr<TensorImpl> output;
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    BackwardFn backward;
  };

  void record(Node node) { nodes_.push_back(std::move(node)); }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<Node> &nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

  /// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate.
  void backward(const Tensor &loss);

 private:
  std::vector<Node> nodes_;
};

class TapeScope {
 public:
  explicit TapeScope(GradTape &tape);
  ~TapeScope();
  TapeScope(const TapeScope &) = delete;
  TapeScope &operator=(const TapeScope &) = delete;

 private:
  GradTape *previous_;
};

/// Suspends recording inside its scope (evaluation, oracles).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope &) = delete;
  NoGradScope &operator=(const NoGradScope &) = delete;

 private:
  GradTape *previous_;
};

GradTape *active_tape();

void backward(const Tensor &loss, GradTape &tape);

}  // namespace mdf

#endif  // MDF_TENSOR_HPP_

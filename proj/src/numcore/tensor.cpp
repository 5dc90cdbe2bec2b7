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
#include "mdf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mdf/error.hpp"

namespace mdf {

namespace {
thread_local GradTape *g_active_tape = nullptr;
}  // namespace

const char *dtype_name(DType dt) { return dt == DType::f32 ? "f32" : "f64"; }

DType dtype_from_name(const std::string &name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw ParameterError("unknown dtype '" + name + "' (expected f32 or f64)");
}

std::size_t shape_numel(const Shape &shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(const Shape &shape, DType dt) { return full(shape, 0.0, dt); }

Tensor Tensor::ones(const Shape &shape, DType dt) { return full(shape, 1.0, dt); }

Tensor Tensor::full(const Shape &shape, double value, DType dt) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->dtype = dt;
  impl->data.assign(shape_numel(shape), round_to(dt, value));
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, DType dt) { return full({}, value, dt); }

Tensor Tensor::from(const Shape &shape, std::vector<double> values, DType dt) {
  if (values.size() != shape_numel(shape)) {
    throw DimensionError("Tensor::from: " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
  }
  if (dt == DType::f32) {
    for (auto &v : values) v = round_to(dt, v);
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->dtype = dt;
  impl->data = std::move(values);
  return Tensor(std::move(impl));
}

const Shape &Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(int axis) const {
  const auto r = static_cast<int>(rank());
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) throw ParameterError("axis " + std::to_string(axis) + " out of range");
  return impl_->shape[static_cast<std::size_t>(a)];
}

std::size_t Tensor::numel() const { return impl_->data.size(); }

DType Tensor::dtype() const { return impl_->dtype; }

std::span<const double> Tensor::data() const { return impl_->data; }

std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) throw DimensionError("at(): index rank mismatch");
  std::size_t flat = 0;
  std::size_t i = 0;
  for (auto v : index) {
    if (v >= impl_->shape[i]) throw DimensionError("at(): index out of range");
    flat = flat * impl_->shape[i] + v;
    ++i;
  }
  return impl_->data[flat];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor &Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return impl_->is_leaf; }

bool Tensor::has_grad() const { return !impl_->grad.empty(); }

std::vector<double> Tensor::grad() const {
  if (impl_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return impl_->grad;
}

Tensor Tensor::grad_tensor() const { return Tensor::from(shape(), grad(), DType::f64); }

void Tensor::zero_grad() { impl_->grad.clear(); }

std::vector<double> &Tensor::grad_buffer() {
  if (impl_->grad.empty()) impl_->grad.assign(numel(), 0.0);
  return impl_->grad;
}

Tensor Tensor::clone() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->data = impl_->data;
  impl->requires_grad = impl_->requires_grad && impl_->is_leaf;
  return Tensor(std::move(impl));
}

Tensor Tensor::detach() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

Tensor Tensor::to(DType dt) const {
  Tensor out = detach();
  out.impl_->dtype = dt;
  if (dt == DType::f32) {
    for (auto &v : out.impl_->data) v = round_to(dt, v);
  }
  return out;
}

void GradTape::backward(const Tensor &loss) {
  if (!loss.defined() || loss.numel() != 1 || loss.rank() != 0) {
    throw ContractError("backward: loss must be a scalar tensor, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  TensorImpl *root = loss.impl();
  if (!root->requires_grad) {
    throw ContractError("backward: loss does not depend on any tensor that requires grad");
  }
  if (!root->is_leaf) {
    const bool on_tape = std::any_of(nodes_.begin(), nodes_.end(),
                                     [&](const Node &n) { return n.output.get() == root; });
    if (!on_tape) throw ContractError("backward: loss was not recorded on this tape");
  }
  // Leaves reachable from the tape always end up with a (possibly zero)
  // gradient buffer.
  for (const auto &node : nodes_) {
    for (const auto &in : node.inputs) {
      if (in->is_leaf && in->requires_grad && in->grad.empty()) in->grad.assign(in->data.size(), 0.0);
    }
  }
  // Intermediate gradients are scratch; reset them so a tape can be swept once.
  for (const auto &node : nodes_) node.output->grad.assign(node.output->data.size(), 0.0);
  if (root->grad.empty()) root->grad.assign(1, 0.0);
  root->grad[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const auto &g = it->output->grad;
    const bool nonzero = std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; });
    if (nonzero) it->backward(g);
  }
  std::unordered_set<TensorImpl *> seen;
  for (const auto &node : nodes_) {
    for (const auto &in : node.inputs) {
      if (!in->is_leaf || !seen.insert(in.get()).second) continue;
      for (auto &v : in->grad) {
        if (!std::isfinite(v)) throw NumericError("backward: non-finite gradient");
        v = round_to(in->dtype, v);
      }
    }
  }
}

TapeScope::TapeScope(GradTape &tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }

NoGradScope::~NoGradScope() { g_active_tape = previous_; }

GradTape *active_tape() { return g_active_tape; }

void backward(const Tensor &loss, GradTape &tape) { tape.backward(loss); }

}  // namespace mdf

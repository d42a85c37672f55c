// Copyright 2026 The eyepad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eyepad/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "eyepad/error.hpp"

namespace eyepad::ad {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : impl_(std::make_shared<Node>()) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError("tensor: shape " + shape_string(shape) + " holds " +
                     std::to_string(shape_size(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->values = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  return impl_->shape.empty() ? 1 : impl_->shape.front();
}

std::size_t Tensor::cols() const {
  if (impl_->shape.size() < 2) return 1;
  std::size_t n = 1;
  for (std::size_t i = 1; i < impl_->shape.size(); ++i) n *= impl_->shape[i];
  return n;
}

double Tensor::item() const {
  if (impl_->values.size() != 1) {
    throw ShapeError("item: expected a single value, shape " + shape_string(impl_->shape));
  }
  return impl_->values.front();
}

std::span<double> Tensor::grad_buffer() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

Tensor Tensor::clone() const {
  Tensor copy(impl_->shape, impl_->values, impl_->requires_grad);
  copy.impl_->grad = impl_->grad;
  return copy;
}

bool Tape::wants_grad(std::initializer_list<const Tensor*> inputs) const {
  if (!recording()) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

void Tape::record(std::string_view kind, std::vector<Tensor> inputs, const Tensor& output,
                  BackwardFn fn) {
  entries_.push_back(Entry{std::string(kind), std::move(inputs), output, std::move(fn)});
}

void Tape::backward(const Tensor& root) {
  if (root.size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " + shape_string(root.shape()));
  }
  if (entries_.empty()) throw PreconditionError("backward: tape is empty");
  Tensor r = root;
  r.grad_buffer()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->fn(it->output, it->inputs);
  }
}

}  // namespace eyepad::ad

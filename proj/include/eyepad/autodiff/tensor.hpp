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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eyepad::ad {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense array of doubles with an optional gradient slot.
///
/// Tensor is a handle: copies share storage, so a parameter held by a
/// ParamStore and the same parameter captured by a Tape are one object.
/// Use clone() for an independent deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->values.size(); }
  // Leading dimension; 1 for scalars.
  std::size_t rows() const;
  // Product of trailing dimensions; 1 for scalars and 1-D tensors.
  std::size_t cols() const;

  std::span<const double> values() const { return impl_->values; }
  // Unchecked write access; ParamStore guards frozen parameters.
  std::span<double> mutable_values() { return impl_->values; }
  double item() const;
  double operator[](std::size_t i) const { return impl_->values[i]; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) { impl_->requires_grad = on; }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  // Returns the gradient buffer, allocating it zero-filled on first use.
  std::span<double> grad_buffer();
  void clear_grad() { impl_->grad.clear(); impl_->grad.shrink_to_fit(); }

  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Node> impl_;
};

/// Record of executed differentiable ops in execution order.
///
/// An op is recorded only when at least one input requires a gradient, so
/// inputs always precede the ops that consume them. backward() walks the
/// record in reverse and visits every entry once.
class Tape {
 public:
  enum class Mode { record, inference };

  // Accumulates into the grads of `inputs` given the grad already held by `output`.
  using BackwardFn = std::function<void(const Tensor& output, std::vector<Tensor>& inputs)>;

  explicit Tape(Mode mode = Mode::record) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::record; }
  bool wants_grad(std::initializer_list<const Tensor*> inputs) const;
  void record(std::string_view kind, std::vector<Tensor> inputs, const Tensor& output, BackwardFn fn);
  std::size_t size() const { return entries_.size(); }
  std::string_view kind_at(std::size_t i) const { return entries_[i].kind; }

  void backward(const Tensor& root);

 private:
  struct Entry {
    std::string kind;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn fn;
  };
  Mode mode_;
  std::vector<Entry> entries_;
};

}  // namespace eyepad::ad

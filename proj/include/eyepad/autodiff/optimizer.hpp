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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eyepad/autodiff/tensor.hpp"

namespace eyepad::ad {

enum class OptimizerKind { sgd, adaptive };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

// Adaptive-moment constants. No momentum for plain SGD.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// Named, ordered collection of trainable tensors plus their optimizer state.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    // Adaptive optimizer moments; empty until the first adaptive step.
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t steps = 0;
  };

  const Tensor& add(std::string name, Tensor tensor);
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::span<const Entry> entries() const { return entries_; }
  std::span<Entry> mutable_entries();

  // Checked write path: throws FrozenError on a frozen store.
  void set_values(std::string_view name, std::span<const double> values);

  void freeze();
  bool frozen() const { return frozen_; }

  // Independent copy of values; trainable, no grads, fresh optimizer state.
  ParamStore deep_copy() const;

  std::size_t parameter_count() const;
  std::vector<double> flat_values() const;
  void load_flat(std::span<const double> values);
  void clear_grads();

 private:
  Entry& find(std::string_view name);
  std::vector<Entry> entries_;
  bool frozen_ = false;
};

enum class UnusedGrad {
  error,  // every parameter must carry a gradient
  skip,   // parameters the loss did not reach keep their values and state
};

/// Applies one update to every parameter of `params`, then clears the grads.
/// A frozen store is left untouched.
void optimizer_step(ParamStore& params, double lr, OptimizerKind kind,
                    UnusedGrad unused = UnusedGrad::error);

// lr * gamma^floor(epoch / decay_after)
double lr_decay(double lr, int epoch, double gamma, int decay_after);

}  // namespace eyepad::ad

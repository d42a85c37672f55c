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

#include "eyepad/autodiff/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "eyepad/error.hpp"

namespace eyepad::ad {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adaptive";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adaptive" || name == "adam") return OptimizerKind::adaptive;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

const Tensor& ParamStore::add(std::string name, Tensor tensor) {
  if (frozen_) throw FrozenError("param store is frozen; cannot add '" + name + "'");
  if (contains(name)) throw PreconditionError("duplicate parameter '" + name + "'");
  tensor.set_requires_grad(true);
  entries_.push_back(Entry{std::move(name), std::move(tensor), {}, {}, 0});
  return entries_.back().tensor;
}

const Tensor& ParamStore::get(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.tensor;
  throw PreconditionError("unknown parameter '" + std::string(name) + "'");
}

bool ParamStore::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

std::span<ParamStore::Entry> ParamStore::mutable_entries() {
  if (frozen_) throw FrozenError("param store is frozen");
  return entries_;
}

ParamStore::Entry& ParamStore::find(std::string_view name) {
  for (auto& e : entries_)
    if (e.name == name) return e;
  throw PreconditionError("unknown parameter '" + std::string(name) + "'");
}

void ParamStore::set_values(std::string_view name, std::span<const double> values) {
  if (frozen_) throw FrozenError("cannot modify parameter '" + std::string(name) + "' of a frozen model");
  auto& e = find(name);
  if (values.size() != e.tensor.size()) {
    throw ShapeError("set_values: '" + std::string(name) + "' has " +
                     std::to_string(e.tensor.size()) + " values, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), e.tensor.mutable_values().begin());
}

void ParamStore::freeze() {
  frozen_ = true;
  for (auto& e : entries_) {
    e.tensor.set_requires_grad(false);
    e.tensor.clear_grad();
  }
}

ParamStore ParamStore::deep_copy() const {
  ParamStore copy;
  for (const auto& e : entries_) {
    Tensor t(e.tensor.shape(), std::vector<double>(e.tensor.values().begin(), e.tensor.values().end()));
    copy.add(e.name, std::move(t));
  }
  return copy;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

std::vector<double> ParamStore::flat_values() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& e : entries_) flat.insert(flat.end(), e.tensor.values().begin(), e.tensor.values().end());
  return flat;
}

void ParamStore::load_flat(std::span<const double> values) {
  if (frozen_) throw FrozenError("cannot load values into a frozen param store");
  if (values.size() != parameter_count()) {
    throw ShapeError("load_flat: expected " + std::to_string(parameter_count()) + " values, got " +
                     std::to_string(values.size()));
  }
  std::size_t offset = 0;
  for (auto& e : entries_) {
    auto dst = e.tensor.mutable_values();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    offset += dst.size();
  }
}

void ParamStore::clear_grads() {
  for (auto& e : entries_) e.tensor.clear_grad();
}

void optimizer_step(ParamStore& params, double lr, OptimizerKind kind, UnusedGrad unused) {
  if (params.frozen()) return;
  auto entries = params.mutable_entries();
  if (unused == UnusedGrad::error) {
    for (const auto& e : entries)
      if (!e.tensor.has_grad()) throw MissingGradError("parameter '" + e.name + "' has no gradient");
  }
  for (auto& e : entries) {
    if (!e.tensor.has_grad()) continue;
    auto w = e.tensor.mutable_values();
    auto g = e.tensor.grad();
    if (kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    } else {
      if (e.first_moment.empty()) {
        e.first_moment.assign(w.size(), 0.0);
        e.second_moment.assign(w.size(), 0.0);
      }
      ++e.steps;
      const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(e.steps));
      const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(e.steps));
      for (std::size_t i = 0; i < w.size(); ++i) {
        e.first_moment[i] = kAdamBeta1 * e.first_moment[i] + (1.0 - kAdamBeta1) * g[i];
        e.second_moment[i] = kAdamBeta2 * e.second_moment[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double m_hat = e.first_moment[i] / c1;
        const double v_hat = e.second_moment[i] / c2;
        w[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
      }
    }
    e.tensor.clear_grad();
  }
}

double lr_decay(double lr, int epoch, double gamma, int decay_after) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw PreconditionError("lr_decay: gamma must be in (0,1]");
  if (decay_after < 1) throw PreconditionError("lr_decay: decay_after must be >= 1");
  if (epoch < 0) throw PreconditionError("lr_decay: epoch must be >= 0");
  return lr * std::pow(gamma, static_cast<double>(epoch / decay_after));
}

}  // namespace eyepad::ad

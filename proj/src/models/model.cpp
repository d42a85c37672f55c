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

#include "eyepad/models/model.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "eyepad/error.hpp"

namespace eyepad::models {

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::small: return "small";
    case Preset::medium: return "medium";
    case Preset::large: return "large";
  }
  return "small";
}

Preset preset_from_string(std::string_view name) {
  if (name == "small") return Preset::small;
  if (name == "medium") return Preset::medium;
  if (name == "large") return Preset::large;
  throw ConfigError("unknown backbone preset '" + std::string(name) + "'");
}

BackboneSpec BackboneSpec::preset(Preset preset, int feature_dim, int height, int width) {
  BackboneSpec spec;
  spec.height = height;
  spec.width = width;
  spec.feature_dim = feature_dim;
  spec.preset_name = std::string(to_string(preset));
  switch (preset) {
    case Preset::small:
      spec.mlp_widths = {64};
      break;
    case Preset::medium:
      spec.conv_stem = {{3, 4}};
      spec.mlp_widths = {128, 64};
      break;
    case Preset::large:
      spec.conv_stem = {{3, 8}};
      spec.mlp_widths = {256, 128};
      break;
  }
  return spec;
}

void BackboneSpec::validate() const {
  if (height < 1 || width < 1) throw PreconditionError("backbone: input dims must be >= 1");
  if (feature_dim < 2) throw PreconditionError("backbone: feature_dim must be >= 2");
  int h = height;
  int w = width;
  for (const auto& c : conv_stem) {
    if (c.kernel_size < 1 || c.channels < 1) {
      throw PreconditionError("backbone: conv kernel size and channel count must be >= 1");
    }
    h = (h - c.kernel_size + 1) / 2;
    w = (w - c.kernel_size + 1) / 2;
    if (h < 1 || w < 1) throw PreconditionError("backbone: conv stem shrinks the input to nothing");
  }
  for (int width_i : mlp_widths)
    if (width_i < 1) throw PreconditionError("backbone: MLP widths must be >= 1");
}

namespace {

Tensor uniform_tensor(ad::Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(ad::shape_size(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

EmbeddingModel::EmbeddingModel(BackboneSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  std::size_t channels = 1;
  std::size_t h = static_cast<std::size_t>(spec_.height);
  std::size_t w = static_cast<std::size_t>(spec_.width);
  for (std::size_t i = 0; i < spec_.conv_stem.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec_.conv_stem[i].kernel_size);
    const auto c_out = static_cast<std::size_t>(spec_.conv_stem[i].channels);
    const std::size_t fan_in = channels * k * k;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    params_.add("conv" + std::to_string(i) + ".weight", uniform_tensor({c_out, fan_in}, bound, rng));
    params_.add("conv" + std::to_string(i) + ".bias", uniform_tensor({c_out}, bound, rng));
    channels = c_out;
    h = (h - k + 1) / 2;
    w = (w - k + 1) / 2;
  }
  std::size_t fan_in = channels * h * w;
  auto linear = [&](const std::string& name, std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    params_.add(name + ".weight", uniform_tensor({fan_in, out}, bound, rng));
    params_.add(name + ".bias", uniform_tensor({out}, bound, rng));
    fan_in = out;
  };
  for (std::size_t i = 0; i < spec_.mlp_widths.size(); ++i)
    linear("fc" + std::to_string(i), static_cast<std::size_t>(spec_.mlp_widths[i]));
  linear("feature", static_cast<std::size_t>(spec_.feature_dim));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  params_.add("pad.weight", uniform_tensor({fan_in}, bound, rng));
  params_.add("pad.bias", uniform_tensor({1}, bound, rng));
}

EmbeddingModel::EmbeddingModel(BackboneSpec spec, ParamStore params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  EmbeddingModel reference(spec_, 0);
  const auto expected = reference.params().entries();
  const auto actual = params_.entries();
  if (expected.size() != actual.size()) {
    throw ShapeError("model: parameter count does not match backbone spec");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].name != actual[i].name || expected[i].tensor.shape() != actual[i].tensor.shape()) {
      throw ShapeError("model: parameter '" + actual[i].name + "' " +
                       ad::shape_string(actual[i].tensor.shape()) + " does not match spec ('" +
                       expected[i].name + "' " + ad::shape_string(expected[i].tensor.shape()) + ")");
    }
  }
}

void EmbeddingModel::check_batch(const Tensor& batch) const {
  if (batch.rank() != 2 || batch.shape()[0] == 0 || batch.shape()[1] != spec_.input_size()) {
    throw ShapeError("model: batch shape " + ad::shape_string(batch.shape()) + ", expected [N," +
                     std::to_string(spec_.input_size()) + "] with N >= 1");
  }
}

Tensor EmbeddingModel::backbone(Tape& tape, const Tensor& batch) const {
  check_batch(batch);
  ad::ImageGeometry geo{1, static_cast<std::size_t>(spec_.height), static_cast<std::size_t>(spec_.width)};
  Tensor x = batch;
  for (std::size_t i = 0; i < spec_.conv_stem.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec_.conv_stem[i].kernel_size);
    const auto& kernel = params_.get("conv" + std::to_string(i) + ".weight");
    const auto& bias = params_.get("conv" + std::to_string(i) + ".bias");
    x = ad::relu(tape, ad::conv2d(tape, x, kernel, bias, geo, k));
    geo = {kernel.shape()[0], geo.height - k + 1, geo.width - k + 1};
    x = ad::avg_pool2(tape, x, geo);
    geo = {geo.channels, geo.height / 2, geo.width / 2};
  }
  for (std::size_t i = 0; i < spec_.mlp_widths.size(); ++i) {
    const std::string name = "fc" + std::to_string(i);
    x = ad::relu(tape, ad::add(tape, ad::matmul(tape, x, params_.get(name + ".weight")),
                               params_.get(name + ".bias")));
  }
  return ad::add(tape, ad::matmul(tape, x, params_.get("feature.weight")), params_.get("feature.bias"));
}

ModelOutput EmbeddingModel::forward(Tape& tape, const Tensor& batch) const {
  Tensor features = backbone(tape, batch);
  Tensor logits = ad::add(tape, ad::matmul(tape, features, params_.get("pad.weight")),
                          params_.get("pad.bias"));
  return {features, logits};
}

Tensor EmbeddingModel::forward_features(Tape& tape, const Tensor& batch) const {
  return backbone(tape, batch);
}

Tensor EmbeddingModel::forward_pad_logit(Tape& tape, const Tensor& batch) const {
  return forward(tape, batch).logits;
}

std::vector<std::vector<double>> EmbeddingModel::features(const Tensor& batch) const {
  Tape tape(Tape::Mode::inference);
  Tensor f = forward_features(tape, batch);
  const std::size_t n = f.shape()[0];
  const std::size_t d = f.shape()[1];
  std::vector<std::vector<double>> rows(n);
  auto v = f.values();
  for (std::size_t i = 0; i < n; ++i)
    rows[i].assign(v.begin() + static_cast<std::ptrdiff_t>(i * d),
                   v.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  return rows;
}

std::vector<double> EmbeddingModel::spoof_probabilities(const Tensor& batch) const {
  Tape tape(Tape::Mode::inference);
  Tensor logits = forward_pad_logit(tape, batch);
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = logistic(logits[i]);
  return probs;
}

EmbeddingModel EmbeddingModel::clone_init() const {
  return EmbeddingModel(spec_, params_.deep_copy());
}

void EmbeddingModel::freeze() { params_.freeze(); }

double logistic(double logit) {
  if (logit >= 0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

Tensor make_batch(const std::vector<const std::vector<float>*>& patches, std::size_t patch_size) {
  std::vector<double> values;
  values.reserve(patches.size() * patch_size);
  for (const auto* p : patches) {
    if (p->size() != patch_size) {
      throw ShapeError("make_batch: patch of " + std::to_string(p->size()) + " values, expected " +
                       std::to_string(patch_size));
    }
    values.insert(values.end(), p->begin(), p->end());
  }
  return Tensor::matrix(patches.size(), patch_size, std::move(values));
}

}  // namespace eyepad::models

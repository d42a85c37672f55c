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
#include <string>
#include <string_view>
#include <vector>

#include "eyepad/autodiff/ops.hpp"
#include "eyepad/autodiff/optimizer.hpp"
#include "eyepad/autodiff/tensor.hpp"

namespace eyepad::models {

using ad::ParamStore;
using ad::Tape;
using ad::Tensor;

enum class Preset { small, medium, large };

std::string_view to_string(Preset preset);
Preset preset_from_string(std::string_view name);

struct ConvLayer {
  int kernel_size = 3;
  int channels = 4;
  bool operator==(const ConvLayer&) const = default;
};

/// Network shape. Each conv layer is valid conv + relu + 2x2 mean pool;
/// each MLP layer is linear + relu; the feature head is linear.
struct BackboneSpec {
  int height = 32;
  int width = 32;
  std::vector<ConvLayer> conv_stem;
  std::vector<int> mlp_widths;
  int feature_dim = 32;
  std::string preset_name = "custom";

  static BackboneSpec preset(Preset preset, int feature_dim = 32, int height = 32, int width = 32);

  void validate() const;
  std::size_t input_size() const { return static_cast<std::size_t>(height) * width; }
  bool operator==(const BackboneSpec&) const = default;
};

struct ModelOutput {
  Tensor features;  // [N, feature_dim], penultimate layer
  Tensor logits;    // [N], spoof logit (higher = spoof)
};

/// Backbone + feature head + single-logit PAD head sharing the backbone.
class EmbeddingModel {
 public:
  EmbeddingModel(BackboneSpec spec, std::uint64_t seed);
  EmbeddingModel(BackboneSpec spec, ParamStore params);

  // batch: [N, H*W] grayscale patches.
  ModelOutput forward(Tape& tape, const Tensor& batch) const;
  Tensor forward_features(Tape& tape, const Tensor& batch) const;
  Tensor forward_pad_logit(Tape& tape, const Tensor& batch) const;

  // Inference helpers; never record.
  std::vector<std::vector<double>> features(const Tensor& batch) const;
  std::vector<double> spoof_probabilities(const Tensor& batch) const;

  // Trainable copy with identical values and independent storage.
  EmbeddingModel clone_init() const;
  void freeze();
  bool frozen() const { return params_.frozen(); }

  const BackboneSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  Tensor backbone(Tape& tape, const Tensor& batch) const;
  void check_batch(const Tensor& batch) const;

  BackboneSpec spec_;
  ParamStore params_;
};

double logistic(double logit);

// Assembles [N, H*W] from float patches.
Tensor make_batch(const std::vector<const std::vector<float>*>& patches, std::size_t patch_size);

}  // namespace eyepad::models

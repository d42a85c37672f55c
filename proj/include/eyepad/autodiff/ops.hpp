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
#include <span>

#include "eyepad/autodiff/tensor.hpp"

// Differentiable ops. Every op throws ShapeError naming the op and the
// offending shapes when its inputs are incompatible.
namespace eyepad::ad {

// [m,k] x [k,n] -> [m,n]; [m,k] x [k] -> [m].
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

// Same shape, or b broadcast: b of size cols(a) over the rows of a 2-D a,
// or b of size 1 over everything.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor div(Tape& tape, const Tensor& a, const Tensor& b);

Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor add_scalar(Tape& tape, const Tensor& a, double value);

Tensor relu(Tape& tape, const Tensor& a);
// max(a, 0) for loss margins; same map as relu under a separate tape label.
Tensor hinge(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
// log(1 + exp(a)), evaluated without overflow.
Tensor softplus(Tape& tape, const Tensor& a);

Tensor sum(Tape& tape, const Tensor& a);
Tensor mean(Tape& tape, const Tensor& a);

// Row-wise reductions over 2-D [m,n] inputs, producing [m].
Tensor dot_rows(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sq_dist_rows(Tape& tape, const Tensor& a, const Tensor& b);
Tensor norm_rows(Tape& tape, const Tensor& a);

// Cosine of each row pair; `eps` is added to each norm.
Tensor cosine_rows(Tape& tape, const Tensor& a, const Tensor& b, double eps = 1e-12);

Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> indices);

struct ImageGeometry {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t size() const { return channels * height * width; }
};

// Valid (unpadded) 2-D convolution, stride 1. input [N, C*H*W],
// kernel [C_out, C*k*k], bias [C_out]; output [N, C_out*(H-k+1)*(W-k+1)].
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernel, const Tensor& bias,
              ImageGeometry geometry, std::size_t kernel_size);

// 2x2 mean pooling, stride 2; odd trailing row/column dropped.
Tensor avg_pool2(Tape& tape, const Tensor& input, ImageGeometry geometry);

}  // namespace eyepad::ad

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

#include "eyepad/autodiff/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "eyepad/error.hpp"

namespace eyepad::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                   " and " + shape_string(b.shape()));
}

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, std::string_view want) {
  throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + ", expected " +
                   std::string(want));
}

Tensor make_output(Shape shape, std::vector<double> values) {
  return Tensor(std::move(shape), std::move(values));
}

void finish(Tape& tape, std::string_view kind, std::vector<Tensor> inputs, Tensor& out,
            Tape::BackwardFn fn) {
  out.set_requires_grad(true);
  tape.record(kind, std::move(inputs), out, std::move(fn));
}

// (rows, cols) of a row-op operand: 1-D is a single row.
std::pair<std::size_t, std::size_t> row_view(std::string_view op, const Tensor& a) {
  if (a.rank() == 1) return {1, a.size()};
  if (a.rank() == 2) return {a.shape()[0], a.shape()[1]};
  shape_fail(op, a, "rank 1 or 2");
}

enum class Broadcast { none, rows, scalar };

Broadcast broadcast_kind(std::string_view op, const Tensor& a, const Tensor& b,
                         bool allow_broadcast) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (allow_broadcast) {
    if (b.size() == 1) return Broadcast::scalar;
    if (a.rank() == 2 && b.rank() == 1 && b.size() == a.shape()[1]) return Broadcast::rows;
  }
  shape_fail(op, a, b);
}

template <typename Fwd>
Tensor unary(Tape& tape, std::string_view kind, const Tensor& a, Fwd fwd,
             double (*deriv)(double x, double y)) {
  std::vector<double> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  Tensor result = make_output(a.shape(), std::move(out));
  if (tape.wants_grad({&a})) {
    finish(tape, kind, {a}, result, [deriv](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      auto y = o.values();
      auto x = in[0].values();
      auto ga = in[0].grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
    });
  }
  return result;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || (b.rank() != 1 && b.rank() != 2) || a.shape()[1] != b.shape()[0]) {
    shape_fail("matmul", a, b);
  }
  const auto m = a.shape()[0];
  const auto k = a.shape()[1];
  const auto n = b.rank() == 2 ? b.shape()[1] : 1;
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.values().data(), m, k) *
                                       ConstMap(b.values().data(), k, n);
  Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
  Tensor result = make_output(std::move(shape), std::move(out));
  if (tape.wants_grad({&a, &b})) {
    finish(tape, "matmul", {a, b}, result, [m, k, n](const Tensor& o, std::vector<Tensor>& in) {
      ConstMap g(o.grad().data(), m, n);
      if (in[0].requires_grad()) {
        MutMap(in[0].grad_buffer().data(), m, k).noalias() +=
            g * ConstMap(in[1].values().data(), k, n).transpose();
      }
      if (in[1].requires_grad()) {
        MutMap(in[1].grad_buffer().data(), k, n).noalias() +=
            ConstMap(in[0].values().data(), m, k).transpose() * g;
      }
    });
  }
  return result;
}

namespace {

template <typename Op, typename DA, typename DB>
Tensor binary(Tape& tape, std::string_view kind, const Tensor& a, const Tensor& b,
              bool allow_broadcast, Op op, DA da, DB db) {
  const auto mode = broadcast_kind(kind, a, b, allow_broadcast);
  const std::size_t cols = mode == Broadcast::rows ? b.size() : 1;
  auto bidx = [mode, cols](std::size_t i) -> std::size_t {
    switch (mode) {
      case Broadcast::none: return i;
      case Broadcast::rows: return i % cols;
      case Broadcast::scalar: return 0;
    }
    return i;
  };
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(av[i], bv[bidx(i)]);
  Tensor result = make_output(a.shape(), std::move(out));
  if (tape.wants_grad({&a, &b})) {
    finish(tape, kind, {a, b}, result,
           [bidx, da, db](const Tensor& o, std::vector<Tensor>& in) {
             auto g = o.grad();
             auto x = in[0].values();
             auto y = in[1].values();
             if (in[0].requires_grad()) {
               auto ga = in[0].grad_buffer();
               for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(x[i], y[bidx(i)]);
             }
             if (in[1].requires_grad()) {
               auto gb = in[1].grad_buffer();
               for (std::size_t i = 0; i < g.size(); ++i) gb[bidx(i)] += g[i] * db(x[i], y[bidx(i)]);
             }
           });
  }
  return result;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary(
      tape, "add", a, b, true, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary(
      tape, "sub", a, b, true, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary(
      tape, "mul", a, b, false, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary(
      tape, "div", a, b, false, [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  Tensor result = make_output(a.shape(), std::move(out));
  if (tape.wants_grad({&a})) {
    finish(tape, "scale", {a}, result, [factor](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      auto ga = in[0].grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return result;
}

Tensor add_scalar(Tape& tape, const Tensor& a, double value) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v += value;
  Tensor result = make_output(a.shape(), std::move(out));
  if (tape.wants_grad({&a})) {
    finish(tape, "add_scalar", {a}, result, [](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      auto ga = in[0].grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return result;
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary(
      tape, "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor hinge(Tape& tape, const Tensor& a) {
  return unary(
      tape, "hinge", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  return unary(
      tape, "sigmoid", a, [](double x) { return stable_sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor log(Tape& tape, const Tensor& a) {
  return unary(
      tape, "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softplus(Tape& tape, const Tensor& a) {
  return unary(
      tape, "softplus", a,
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return stable_sigmoid(x); });
}

Tensor sum(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  Tensor result = Tensor::scalar(total);
  if (tape.wants_grad({&a})) {
    finish(tape, "sum", {a}, result, [](const Tensor& o, std::vector<Tensor>& in) {
      const double g = o.grad()[0];
      for (auto& v : in[0].grad_buffer()) v += g;
    });
  }
  return result;
}

Tensor mean(Tape& tape, const Tensor& a) {
  if (a.size() == 0) shape_fail("mean", a, "non-empty");
  double total = 0.0;
  for (double v : a.values()) total += v;
  const double n = static_cast<double>(a.size());
  Tensor result = Tensor::scalar(total / n);
  if (tape.wants_grad({&a})) {
    finish(tape, "mean", {a}, result, [n](const Tensor& o, std::vector<Tensor>& in) {
      const double g = o.grad()[0] / n;
      for (auto& v : in[0].grad_buffer()) v += g;
    });
  }
  return result;
}

Tensor dot_rows(Tape& tape, const Tensor& a, const Tensor& b) {
  const auto [m, n] = row_view("dot", a);
  if (a.shape() != b.shape()) shape_fail("dot", a, b);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += av[i * n + j] * bv[i * n + j];
    out[i] = acc;
  }
  Tensor result = make_output({m}, std::move(out));
  if (tape.wants_grad({&a, &b})) {
    finish(tape, "dot", {a, b}, result, [m, n](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      for (int side = 0; side < 2; ++side) {
        if (!in[side].requires_grad()) continue;
        auto other = in[1 - side].values();
        auto gs = in[side].grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gs[i * n + j] += g[i] * other[i * n + j];
      }
    });
  }
  return result;
}

Tensor sq_dist_rows(Tape& tape, const Tensor& a, const Tensor& b) {
  const auto [m, n] = row_view("squared_l2_distance", a);
  if (a.shape() != b.shape()) shape_fail("squared_l2_distance", a, b);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = av[i * n + j] - bv[i * n + j];
      acc += d * d;
    }
    out[i] = acc;
  }
  Tensor result = make_output({m}, std::move(out));
  if (tape.wants_grad({&a, &b})) {
    finish(tape, "squared_l2_distance", {a, b}, result,
           [m, n](const Tensor& o, std::vector<Tensor>& in) {
             auto g = o.grad();
             auto x = in[0].values();
             auto y = in[1].values();
             const double sign[2] = {1.0, -1.0};
             for (int side = 0; side < 2; ++side) {
               if (!in[side].requires_grad()) continue;
               auto gs = in[side].grad_buffer();
               for (std::size_t i = 0; i < m; ++i)
                 for (std::size_t j = 0; j < n; ++j)
                   gs[i * n + j] += sign[side] * 2.0 * g[i] * (x[i * n + j] - y[i * n + j]);
             }
           });
  }
  return result;
}

Tensor norm_rows(Tape& tape, const Tensor& a) {
  const auto [m, n] = row_view("l2_norm", a);
  auto av = a.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += av[i * n + j] * av[i * n + j];
    out[i] = std::sqrt(acc);
  }
  Tensor result = make_output({m}, std::move(out));
  if (tape.wants_grad({&a})) {
    finish(tape, "l2_norm", {a}, result, [m, n](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      auto norms = o.values();
      auto x = in[0].values();
      auto ga = in[0].grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        // Subgradient 0 at the origin.
        if (norms[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[i] * x[i * n + j] / norms[i];
      }
    });
  }
  return result;
}

Tensor cosine_rows(Tape& tape, const Tensor& a, const Tensor& b, double eps) {
  Tensor dots = dot_rows(tape, a, b);
  Tensor na = add_scalar(tape, norm_rows(tape, a), eps);
  Tensor nb = add_scalar(tape, norm_rows(tape, b), eps);
  return div(tape, dots, mul(tape, na, nb));
}

Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> indices) {
  const auto [m, n] = row_view("gather_rows", a);
  for (auto idx : indices) {
    if (idx >= m) {
      throw ShapeError("gather_rows: index " + std::to_string(idx) + " out of range for shape " +
                       shape_string(a.shape()));
    }
  }
  auto av = a.values();
  std::vector<double> out(indices.size() * n);
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(indices[r] * n), n,
                out.begin() + static_cast<std::ptrdiff_t>(r * n));
  Tensor result = make_output({indices.size(), n}, std::move(out));
  if (tape.wants_grad({&a})) {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    finish(tape, "gather_rows", {a}, result,
           [idx = std::move(idx), n](const Tensor& o, std::vector<Tensor>& in) {
             auto g = o.grad();
             auto ga = in[0].grad_buffer();
             for (std::size_t r = 0; r < idx.size(); ++r)
               for (std::size_t j = 0; j < n; ++j) ga[idx[r] * n + j] += g[r * n + j];
           });
  }
  return result;
}

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernel, const Tensor& bias,
              ImageGeometry geo, std::size_t k) {
  if (input.rank() != 2 || input.shape()[1] != geo.size()) {
    shape_fail("conv2d", input, "[N," + std::to_string(geo.size()) + "]");
  }
  if (k == 0 || k > geo.height || k > geo.width) {
    throw ShapeError("conv2d: kernel size " + std::to_string(k) + " does not fit " +
                     std::to_string(geo.height) + "x" + std::to_string(geo.width));
  }
  const std::size_t patch = geo.channels * k * k;
  if (kernel.rank() != 2 || kernel.shape()[1] != patch) shape_fail("conv2d", kernel, input);
  const std::size_t c_out = kernel.shape()[0];
  if (bias.size() != c_out) shape_fail("conv2d", bias, kernel);

  const std::size_t batch = input.shape()[0];
  const std::size_t ho = geo.height - k + 1;
  const std::size_t wo = geo.width - k + 1;
  const std::size_t positions = ho * wo;
  const std::size_t plane = geo.height * geo.width;

  // im2col: one row per (sample, output position).
  auto columns = std::make_shared<std::vector<double>>(batch * positions * patch);
  auto x = input.values();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* img = x.data() + s * geo.size();
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        double* row = columns->data() + ((s * positions) + i * wo + j) * patch;
        for (std::size_t c = 0; c < geo.channels; ++c)
          for (std::size_t di = 0; di < k; ++di)
            for (std::size_t dj = 0; dj < k; ++dj)
              *row++ = img[c * plane + (i + di) * geo.width + (j + dj)];
      }
  }
  RowMat prod = ConstMap(columns->data(), batch * positions, patch) *
                ConstMap(kernel.values().data(), c_out, patch).transpose();
  std::vector<double> out(batch * c_out * positions);
  auto bv = bias.values();
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t p = 0; p < positions; ++p)
      for (std::size_t c = 0; c < c_out; ++c)
        out[(s * c_out + c) * positions + p] = prod(s * positions + p, c) + bv[c];

  Tensor result = make_output({batch, c_out * positions}, std::move(out));
  if (tape.wants_grad({&input, &kernel, &bias})) {
    finish(tape, "conv2d", {input, kernel, bias}, result,
           [=](const Tensor& o, std::vector<Tensor>& in) {
             auto g = o.grad();
             RowMat gcol(batch * positions, c_out);
             for (std::size_t s = 0; s < batch; ++s)
               for (std::size_t p = 0; p < positions; ++p)
                 for (std::size_t c = 0; c < c_out; ++c)
                   gcol(s * positions + p, c) = g[(s * c_out + c) * positions + p];
             ConstMap cols(columns->data(), batch * positions, patch);
             if (in[1].requires_grad()) {
               MutMap(in[1].grad_buffer().data(), c_out, patch).noalias() += gcol.transpose() * cols;
             }
             if (in[2].requires_grad()) {
               auto gb = in[2].grad_buffer();
               for (std::size_t c = 0; c < c_out; ++c) gb[c] += gcol.col(c).sum();
             }
             if (in[0].requires_grad()) {
               RowMat gpatch = gcol * ConstMap(in[1].values().data(), c_out, patch);
               auto gx = in[0].grad_buffer();
               for (std::size_t s = 0; s < batch; ++s) {
                 double* img = gx.data() + s * geo.size();
                 for (std::size_t i = 0; i < ho; ++i)
                   for (std::size_t j = 0; j < wo; ++j) {
                     const double* row = gpatch.data() + ((s * positions) + i * wo + j) * patch;
                     for (std::size_t c = 0; c < geo.channels; ++c)
                       for (std::size_t di = 0; di < k; ++di)
                         for (std::size_t dj = 0; dj < k; ++dj)
                           img[c * plane + (i + di) * geo.width + (j + dj)] += *row++;
                   }
               }
             }
           });
  }
  return result;
}

Tensor avg_pool2(Tape& tape, const Tensor& input, ImageGeometry geo) {
  if (input.rank() != 2 || input.shape()[1] != geo.size()) {
    shape_fail("avg_pool2", input, "[N," + std::to_string(geo.size()) + "]");
  }
  const std::size_t batch = input.shape()[0];
  const std::size_t ho = geo.height / 2;
  const std::size_t wo = geo.width / 2;
  if (ho == 0 || wo == 0) shape_fail("avg_pool2", input, "spatial dims >= 2");
  const std::size_t out_plane = ho * wo;
  const std::size_t in_plane = geo.height * geo.width;
  auto x = input.values();
  std::vector<double> out(batch * geo.channels * out_plane);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t c = 0; c < geo.channels; ++c) {
      const double* src = x.data() + s * geo.size() + c * in_plane;
      double* dst = out.data() + (s * geo.channels + c) * out_plane;
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j) {
          const std::size_t r = 2 * i * geo.width + 2 * j;
          dst[i * wo + j] = 0.25 * (src[r] + src[r + 1] + src[r + geo.width] + src[r + geo.width + 1]);
        }
    }
  Tensor result = make_output({batch, geo.channels * out_plane}, std::move(out));
  if (tape.wants_grad({&input})) {
    finish(tape, "avg_pool2", {input}, result, [=](const Tensor& o, std::vector<Tensor>& in) {
      auto g = o.grad();
      auto gx = in[0].grad_buffer();
      for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t c = 0; c < geo.channels; ++c) {
          double* dst = gx.data() + s * geo.size() + c * in_plane;
          const double* src = g.data() + (s * geo.channels + c) * out_plane;
          for (std::size_t i = 0; i < ho; ++i)
            for (std::size_t j = 0; j < wo; ++j) {
              const double v = 0.25 * src[i * wo + j];
              const std::size_t r = 2 * i * geo.width + 2 * j;
              dst[r] += v;
              dst[r + 1] += v;
              dst[r + geo.width] += v;
              dst[r + geo.width + 1] += v;
            }
        }
    });
  }
  return result;
}

}  // namespace eyepad::ad

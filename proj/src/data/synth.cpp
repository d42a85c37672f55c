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

#include "eyepad/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::data {
namespace {

constexpr double kFreqMin = 1.5;
constexpr double kFreqMax = 4.5;
constexpr double kRadiusMin = 0.55;
constexpr double kRadiusMax = 0.9;
constexpr double kPupilRadius = 0.22;
constexpr double kEdge = 0.04;
constexpr double kLensFrequency = 6.5;
constexpr int kMaxDrawAttempts = 2000;

double circular_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

double smoothstep(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

float clip01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

std::string_view to_string(EyeSide v) { return v == EyeSide::left ? "L" : "R"; }

std::string_view to_string(Liveness v) {
  switch (v) {
    case Liveness::live: return "live";
    case Liveness::spoof_lens: return "spoof_lens";
    case Liveness::spoof_print: return "spoof_print";
  }
  return "live";
}

std::string_view to_string(Split v) {
  switch (v) {
    case Split::ea_train: return "ea_train";
    case Split::ea_query: return "ea_query";
    case Split::ea_gallery: return "ea_gallery";
    case Split::pad_train: return "pad_train";
    case Split::pad_test: return "pad_test";
  }
  return "ea_train";
}

std::string_view to_string(Degradation v) {
  switch (v) {
    case Degradation::clean: return "clean";
    case Degradation::blur: return "blur";
    case Degradation::noise: return "noise";
  }
  return "clean";
}

std::string_view to_string(TrainSides v) { return v == TrainSides::both ? "both" : "left"; }

Degradation degradation_from_string(std::string_view name) {
  if (name == "clean") return Degradation::clean;
  if (name == "blur") return Degradation::blur;
  if (name == "noise") return Degradation::noise;
  throw ConfigError("unknown degradation '" + std::string(name) + "'");
}

TrainSides train_sides_from_string(std::string_view name) {
  if (name == "both") return TrainSides::both;
  if (name == "left") return TrainSides::left;
  throw ConfigError("unknown EA training side selection '" + std::string(name) + "'");
}

const IdentityLatent& UserLatents::at(int user_id, EyeSide side) const {
  for (const auto& l : latents)
    if (l.user_id == user_id && l.side == side) return l;
  throw PreconditionError("no latent for user " + std::to_string(user_id));
}

double latent_separation(const IdentityLatent& a, const IdentityLatent& b) {
  const double span = kFreqMax - kFreqMin;
  double gap = std::abs(a.freq_u - b.freq_u) / span;
  gap = std::max(gap, std::abs(a.freq_v - b.freq_v) / span);
  gap = std::max(gap, circular_gap(a.orientation / std::numbers::pi, b.orientation / std::numbers::pi));
  gap = std::max(gap, circular_gap(a.phase / (2 * std::numbers::pi), b.phase / (2 * std::numbers::pi)));
  return gap;
}

UserLatents generate_users(int n_train_users, int n_test_users, std::uint64_t seed,
                           double min_separation, int first_user_id) {
  if (n_train_users < 2 || n_test_users < 2) {
    throw PreconditionError("generate_users: need at least 2 train and 2 test users");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(kFreqMin, kFreqMax);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(kRadiusMin, kRadiusMax);

  UserLatents out;
  const int total = n_train_users + n_test_users;
  for (int u = 0; u < total; ++u) {
    const int user_id = first_user_id + u;
    const double r = radius(rng);
    for (EyeSide side : {EyeSide::left, EyeSide::right}) {
      IdentityLatent candidate;
      bool placed = false;
      for (int attempt = 0; attempt < kMaxDrawAttempts && !placed; ++attempt) {
        candidate = {user_id, side, freq(rng), freq(rng), angle(rng), phase(rng), r};
        placed = std::all_of(out.latents.begin(), out.latents.end(), [&](const IdentityLatent& other) {
          return latent_separation(candidate, other) >= min_separation;
        });
      }
      if (!placed) {
        throw PreconditionError("generate_users: cannot place " + std::to_string(2 * total) +
                                " latents with separation " + std::to_string(min_separation));
      }
      out.latents.push_back(candidate);
    }
    (u < n_train_users ? out.train_users : out.test_users).push_back(user_id);
  }
  return out;
}

std::vector<float> render_sample(const IdentityLatent& latent, Liveness liveness, double noise_scale,
                                 std::uint64_t seed, const RenderOptions& options) {
  const int h = options.height;
  const int w = options.width;
  const auto& nz = options.nuisance;
  const double cos_r = std::cos(nz.rotation);
  const double sin_r = std::sin(nz.rotation);
  const double cos_t = std::cos(latent.orientation);
  const double sin_t = std::sin(latent.orientation);
  const double two_pi = 2 * std::numbers::pi;

  std::vector<double> clean(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      // Eye-centred coordinates in [-1,1], pose applied.
      const double px = (j + 0.5 - w / 2.0 - nz.shift_x) / (w / 2.0);
      const double py = (i + 0.5 - h / 2.0 - nz.shift_y) / (h / 2.0);
      const double x = cos_r * px + sin_r * py;
      const double y = -sin_r * px + cos_r * py;
      const double rho = std::sqrt(x * x + y * y);

      const double u = cos_t * x + sin_t * y;
      const double v = -sin_t * x + cos_t * y;
      const double texture = 0.5 + 0.2 * std::sin(two_pi * latent.freq_u * u + latent.phase) +
                             0.15 * std::sin(two_pi * latent.freq_v * v + 2.0 * latent.phase);
      const double skin = 0.72 - 0.08 * y;
      const double pupil = 0.08;

      const double in_iris = smoothstep(kPupilRadius - kEdge, kPupilRadius + kEdge, rho) *
                             (1.0 - smoothstep(latent.iris_radius - kEdge, latent.iris_radius + kEdge, rho));
      const double outside = smoothstep(latent.iris_radius - kEdge, latent.iris_radius + kEdge, rho);
      double value = in_iris * texture + outside * skin + (1.0 - in_iris - outside) * pupil;

      if (liveness == Liveness::spoof_lens) {
        const double grid = std::cos(two_pi * kLensFrequency * x) * std::cos(two_pi * kLensFrequency * y);
        value += in_iris * options.lens_amplitude * grid;
      }
      value = 0.5 + nz.gain * (value - 0.5);
      clean[static_cast<std::size_t>(i) * w + j] = value;
    }
  }
  if (liveness == Liveness::spoof_print) {
    for (auto& v : clean) v = v >= 0.5 ? kPrintHigh : kPrintLow;
  }

  std::vector<float> patch(clean.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, noise_scale > 0 ? noise_scale : 1.0);
  for (std::size_t k = 0; k < clean.size(); ++k) {
    const double n = noise_scale > 0 ? jitter(rng) : 0.0;
    patch[k] = clip01(clean[k] + n);
  }
  return patch;
}

std::vector<double> gaussian_kernel(int kernel_size) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw PreconditionError("gaussian blur: kernel size must be odd and positive, got " +
                            std::to_string(kernel_size));
  }
  // Width rule for an unspecified sigma, as in common imaging libraries.
  const double sigma = 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
  const int half = kernel_size / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel_size));
  double total = 0.0;
  for (int t = -half; t <= half; ++t) {
    const double v = std::exp(-(t * t) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(t + half)] = v;
    total += v;
  }
  for (auto& v : taps) v /= total;
  return taps;
}

std::vector<float> degrade_blur(const std::vector<float>& patch, int height, int width, int kernel_size) {
  const auto taps = gaussian_kernel(kernel_size);
  if (patch.size() != static_cast<std::size_t>(height) * width) {
    throw PreconditionError("gaussian blur: patch size does not match dimensions");
  }
  if (kernel_size == 1) return patch;
  const int half = kernel_size / 2;
  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  std::vector<double> tmp(patch.size());
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      double acc = 0.0;
      for (int t = -half; t <= half; ++t)
        acc += taps[static_cast<std::size_t>(t + half)] * patch[static_cast<std::size_t>(i) * width + reflect(j + t, width)];
      tmp[static_cast<std::size_t>(i) * width + j] = acc;
    }
  std::vector<float> out(patch.size());
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      double acc = 0.0;
      for (int t = -half; t <= half; ++t)
        acc += taps[static_cast<std::size_t>(t + half)] * tmp[static_cast<std::size_t>(reflect(i + t, height)) * width + j];
      out[static_cast<std::size_t>(i) * width + j] = clip01(acc);
    }
  return out;
}

std::vector<float> degrade_noise(const std::vector<float>& patch, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw PreconditionError("additive noise: sigma must be >= 0");
  if (sigma == 0) return patch;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<float> out(patch.size());
  for (std::size_t k = 0; k < patch.size(); ++k) out[k] = clip01(patch[k] + noise(rng));
  return out;
}

void DataConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("data.") + name + " must be >= 1");
  };
  if (n_train_users < 2) throw ConfigError("data.n_train_users must be >= 2");
  if (n_test_users < 2) throw ConfigError("data.n_test_users must be >= 2");
  if (pad_train_users < 1) throw ConfigError("data.pad_train_users must be >= 1");
  if (pad_test_users < 1) throw ConfigError("data.pad_test_users must be >= 1");
  if (train_images_per_side < 2) throw ConfigError("data.train_images_per_side must be >= 2");
  positive(query_per_side, "query_per_side");
  positive(gallery_per_side, "gallery_per_side");
  positive(pad_live_per_user, "pad_live_per_user");
  if (pad_lens_per_user < 0 || pad_print_per_user < 0) throw ConfigError("data: spoof counts must be >= 0");
  if (height < 8 || width < 8) throw ConfigError("data: patches must be at least 8x8");
  if (noise_scale < 0 || max_shift < 0 || max_rotation < 0 || gain_jitter < 0 || gain_jitter >= 1) {
    throw ConfigError("data: nuisance magnitudes must be >= 0 (gain_jitter < 1)");
  }
  if (min_separation < 0) throw ConfigError("data.min_separation must be >= 0");
  if (!(ea_lens_fraction >= 0 && ea_lens_fraction <= 1)) throw ConfigError("data.ea_lens_fraction must lie in [0,1]");
  if (!(lens_amplitude_min >= 0 && lens_amplitude_min <= lens_amplitude)) {
    throw ConfigError("data.lens_amplitude_min must lie in [0, lens_amplitude]");
  }
}

std::vector<const EyeSample*> DatasetBundle::split(Split s) const {
  std::vector<const EyeSample*> out;
  for (const auto& sample : samples)
    if (sample.split == s) out.push_back(&sample);
  return out;
}

SplitCounts DatasetBundle::counts() const {
  SplitCounts c;
  for (const auto& s : samples) {
    switch (s.split) {
      case Split::ea_train: ++c.ea_train; break;
      case Split::ea_query: ++c.ea_query; break;
      case Split::ea_gallery: ++c.ea_gallery; break;
      case Split::pad_train: ++c.pad_train; break;
      case Split::pad_test: ++c.pad_test; break;
    }
  }
  return c;
}

DatasetBundle build_bundle(const DataConfig& config) {
  config.validate();
  DatasetBundle bundle;
  bundle.config = config;
  const auto ea = generate_users(config.n_train_users, config.n_test_users, io::derive_seed(config.seed, "ea_users"),
                                 config.min_separation, 0);
  const auto pad = generate_users(std::max(config.pad_train_users, 2), std::max(config.pad_test_users, 2),
                                  io::derive_seed(config.seed, "pad_users"), config.min_separation, 100000);

  std::uint64_t index = 0;
  auto emit = [&](const IdentityLatent& latent, Liveness liveness, Split split) {
    const std::uint64_t i = index++;
    std::mt19937_64 pose_rng(io::derive_seed(config.seed, "nuisance", i));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    RenderOptions opts;
    opts.height = config.height;
    opts.width = config.width;
    opts.nuisance.shift_x = config.max_shift * unit(pose_rng);
    opts.nuisance.shift_y = config.max_shift * unit(pose_rng);
    opts.nuisance.rotation = config.max_rotation * unit(pose_rng);
    opts.nuisance.gain = 1.0 + config.gain_jitter * unit(pose_rng);
    const double lens_mix = 0.5 * (unit(pose_rng) + 1.0);
    opts.lens_amplitude = config.lens_amplitude_min + (config.lens_amplitude - config.lens_amplitude_min) * lens_mix;
    const bool worn_lens = split == Split::ea_train && 0.5 * (unit(pose_rng) + 1.0) < config.ea_lens_fraction;
    auto patch = render_sample(latent, worn_lens ? Liveness::spoof_lens : liveness, config.noise_scale,
                               io::derive_seed(config.seed, "render", i), opts);

    const bool test_split = split == Split::ea_query || split == Split::ea_gallery || split == Split::pad_test;
    switch (config.degradation) {
      case Degradation::clean: break;
      case Degradation::blur: {
        int k = kTestBlurKernel;
        if (!test_split) {
          static constexpr int kTrainKernels[] = {1, 3, 5};
          k = kTrainKernels[io::derive_seed(config.seed, "blur", i) % 3];
        }
        patch = degrade_blur(patch, config.height, config.width, k);
        break;
      }
      case Degradation::noise:
        patch = degrade_noise(patch, kNoiseSigma, io::derive_seed(config.seed, "noise", i));
        break;
    }
    bundle.samples.push_back({std::move(patch), latent.user_id, latent.side, liveness, split});
  };

  std::vector<EyeSide> train_sides{EyeSide::left, EyeSide::right};
  if (config.ea_train_sides == TrainSides::left) train_sides = {EyeSide::left};
  for (int user : ea.train_users)
    for (EyeSide side : train_sides)
      for (int k = 0; k < config.train_images_per_side; ++k) emit(ea.at(user, side), Liveness::live, Split::ea_train);
  for (Split split : {Split::ea_query, Split::ea_gallery}) {
    const int per_side = split == Split::ea_query ? config.query_per_side : config.gallery_per_side;
    for (int user : ea.test_users)
      for (EyeSide side : {EyeSide::left, EyeSide::right})
        for (int k = 0; k < per_side; ++k) emit(ea.at(user, side), Liveness::live, split);
  }
  auto pad_users = [&](Split split) {
    const auto& users = split == Split::pad_train ? pad.train_users : pad.test_users;
    const int n = split == Split::pad_train ? config.pad_train_users : config.pad_test_users;
    for (int u = 0; u < n; ++u) {
      const int user = users[static_cast<std::size_t>(u)];
      auto one = [&](Liveness liveness) {
        const EyeSide side = io::derive_seed(config.seed, "pad_side", index) % 2 == 0 ? EyeSide::left : EyeSide::right;
        emit(pad.at(user, side), liveness, split);
      };
      for (int k = 0; k < config.pad_live_per_user; ++k) one(Liveness::live);
      for (int k = 0; k < config.pad_lens_per_user; ++k) one(Liveness::spoof_lens);
      for (int k = 0; k < config.pad_print_per_user; ++k) one(Liveness::spoof_print);
    }
  };
  pad_users(Split::pad_train);
  pad_users(Split::pad_test);
  return bundle;
}

EaTrainSet ea_train_set(const DatasetBundle& bundle) {
  EaTrainSet set;
  std::map<std::pair<int, int>, int> classes;
  for (const auto* s : bundle.split(Split::ea_train)) {
    const auto key = std::make_pair(s->user_id, static_cast<int>(s->side));
    auto [it, inserted] = classes.try_emplace(key, static_cast<int>(classes.size()));
    set.samples.push_back(s);
    set.labels.push_back(it->second);
  }
  set.num_classes = static_cast<int>(classes.size());
  return set;
}

PadSet pad_set(const DatasetBundle& bundle, Split split) {
  PadSet set;
  for (const auto* s : bundle.split(split)) {
    set.samples.push_back(s);
    set.labels.push_back(s->spoof() ? 1 : 0);
  }
  return set;
}

std::vector<UserEyeImages> images_by_user(const DatasetBundle& bundle, Split split) {
  std::map<int, UserEyeImages> users;
  for (const auto* s : bundle.split(split)) {
    auto& u = users[s->user_id];
    u.user_id = s->user_id;
    (s->side == EyeSide::left ? u.left : u.right).push_back(s);
  }
  std::vector<UserEyeImages> out;
  for (auto& [id, u] : users) out.push_back(std::move(u));
  return out;
}

}  // namespace eyepad::data

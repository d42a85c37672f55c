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
#include <filesystem>
#include <string_view>
#include <vector>

namespace eyepad::data {

enum class EyeSide { left, right };
enum class Liveness { live, spoof_lens, spoof_print };
enum class Split { ea_train, ea_query, ea_gallery, pad_train, pad_test };
enum class Degradation { clean, blur, noise };
enum class TrainSides { both, left };

std::string_view to_string(EyeSide v);
std::string_view to_string(Liveness v);
std::string_view to_string(Split v);
std::string_view to_string(Degradation v);
std::string_view to_string(TrainSides v);
Degradation degradation_from_string(std::string_view name);
TrainSides train_sides_from_string(std::string_view name);

struct EyeSample {
  std::vector<float> patch;  // row-major H*W, values in [0,1]
  int user_id = 0;
  EyeSide side = EyeSide::left;
  Liveness liveness = Liveness::live;
  Split split = Split::ea_train;

  bool spoof() const { return liveness != Liveness::live; }
};

/// Texture parameters of one (user, eye) pair. Frequencies are cycles per
/// half-patch; the iris radius is shared by both eyes of a user.
struct IdentityLatent {
  int user_id = 0;
  EyeSide side = EyeSide::left;
  double freq_u = 0;
  double freq_v = 0;
  double orientation = 0;  // [0, pi)
  double phase = 0;        // [0, 2*pi)
  double iris_radius = 0;
};

struct UserLatents {
  std::vector<IdentityLatent> latents;  // user-major, left before right
  std::vector<int> train_users;
  std::vector<int> test_users;

  const IdentityLatent& at(int user_id, EyeSide side) const;
};

inline constexpr double kDefaultSeparation = 0.08;

// Largest per-parameter gap between two latents, each parameter normalized
// to [0,1) over its range (angles by circular distance).
double latent_separation(const IdentityLatent& a, const IdentityLatent& b);

/// Draws latents for n_train + n_test users with ids first_user_id...; every
/// pair of (user, side) latents is at least `min_separation` apart.
/// Throws PreconditionError when the separation cannot be met.
UserLatents generate_users(int n_train_users, int n_test_users, std::uint64_t seed,
                           double min_separation = kDefaultSeparation, int first_user_id = 0);

// Pose and illumination variation applied before jitter.
struct Nuisance {
  double shift_x = 0;   // pixels
  double shift_y = 0;   // pixels
  double rotation = 0;  // radians
  double gain = 1.0;    // contrast around mid-gray
};

struct RenderOptions {
  int height = 32;
  int width = 32;
  double lens_amplitude = 0.12;
  Nuisance nuisance;
};

inline constexpr float kPrintLow = 0.2f;
inline constexpr float kPrintHigh = 0.8f;

/// Live: identity texture inside an iris ring. Lens spoof: live texture
/// plus a regular high-frequency grid over the iris. Print spoof: live
/// render quantized to two gray levels. Gaussian jitter with sigma
/// `noise_scale` is added last, then values are clipped to [0,1].
std::vector<float> render_sample(const IdentityLatent& latent, Liveness liveness, double noise_scale,
                                 std::uint64_t seed, const RenderOptions& options = {});

// 1-D normalized Gaussian taps for an odd kernel size.
std::vector<double> gaussian_kernel(int kernel_size);

// Separable Gaussian blur with reflect-101 borders. kernel_size must be odd.
std::vector<float> degrade_blur(const std::vector<float>& patch, int height, int width, int kernel_size);

// Additive white Gaussian noise, clipped to [0,1].
std::vector<float> degrade_noise(const std::vector<float>& patch, double sigma, std::uint64_t seed);

// AWGN sigma 3.0 on the 0-255 scale.
inline constexpr double kNoiseSigma = 3.0 / 255.0;
inline constexpr int kTestBlurKernel = 5;

struct DataConfig {
  int n_train_users = 60;
  int n_test_users = 40;
  int train_images_per_side = 20;
  int query_per_side = 10;
  int gallery_per_side = 5;
  int pad_train_users = 30;
  int pad_test_users = 30;
  int pad_live_per_user = 20;
  int pad_lens_per_user = 10;
  int pad_print_per_user = 10;
  int height = 32;
  int width = 32;
  double noise_scale = 0.02;
  double max_shift = 0.5;
  double max_rotation = 0.1;
  double gain_jitter = 0.1;
  double lens_amplitude = 0.3;       // strongest lens grid
  double lens_amplitude_min = 0.1;   // per-sample amplitude is uniform in [min, max]
  double ea_lens_fraction = 0.0;     // EA training images worn with a textured lens
  double min_separation = kDefaultSeparation;
  Degradation degradation = Degradation::clean;
  TrainSides ea_train_sides = TrainSides::both;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SplitCounts {
  std::size_t ea_train = 0, ea_query = 0, ea_gallery = 0, pad_train = 0, pad_test = 0;
};

/// All samples of one benchmark in manifest order: EA train, query,
/// gallery, PAD train, PAD test.
struct DatasetBundle {
  DataConfig config;
  std::vector<EyeSample> samples;

  std::vector<const EyeSample*> split(Split s) const;
  SplitCounts counts() const;
  std::size_t patch_size() const { return static_cast<std::size_t>(config.height) * config.width; }
};

DatasetBundle build_bundle(const DataConfig& config);

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);
bool bundle_exists(const std::filesystem::path& dir);

struct EaTrainSet {
  std::vector<const EyeSample*> samples;
  std::vector<int> labels;  // dense (user, side) class index
  int num_classes = 0;
};

struct PadSet {
  std::vector<const EyeSample*> samples;
  std::vector<int> labels;  // 0 live, 1 spoof
};

// Views into `bundle`, which must outlive them.
EaTrainSet ea_train_set(const DatasetBundle& bundle);
PadSet pad_set(const DatasetBundle& bundle, Split split);

struct UserEyeImages {
  int user_id = 0;
  std::vector<const EyeSample*> left;
  std::vector<const EyeSample*> right;
};

// Per-user image lists of an EA split, ordered by user id.
std::vector<UserEyeImages> images_by_user(const DatasetBundle& bundle, Split split);

}  // namespace eyepad::data

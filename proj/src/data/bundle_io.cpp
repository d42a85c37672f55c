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

#include <json.hpp>

#include "eyepad/data/synth.hpp"
#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::data {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "eyepad-bundle";
constexpr int kVersion = 1;

json config_to_json(const DataConfig& c) {
  return {{"n_train_users", c.n_train_users},
          {"n_test_users", c.n_test_users},
          {"train_images_per_side", c.train_images_per_side},
          {"query_per_side", c.query_per_side},
          {"gallery_per_side", c.gallery_per_side},
          {"pad_train_users", c.pad_train_users},
          {"pad_test_users", c.pad_test_users},
          {"pad_live_per_user", c.pad_live_per_user},
          {"pad_lens_per_user", c.pad_lens_per_user},
          {"pad_print_per_user", c.pad_print_per_user},
          {"height", c.height},
          {"width", c.width},
          {"noise_scale", c.noise_scale},
          {"max_shift", c.max_shift},
          {"max_rotation", c.max_rotation},
          {"gain_jitter", c.gain_jitter},
          {"lens_amplitude", c.lens_amplitude},
          {"lens_amplitude_min", c.lens_amplitude_min},
          {"ea_lens_fraction", c.ea_lens_fraction},
          {"min_separation", c.min_separation},
          {"degradation", to_string(c.degradation)},
          {"ea_train_sides", to_string(c.ea_train_sides)},
          {"seed", c.seed}};
}

DataConfig config_from_json(const json& j) {
  DataConfig c;
  c.n_train_users = j.at("n_train_users").get<int>();
  c.n_test_users = j.at("n_test_users").get<int>();
  c.train_images_per_side = j.at("train_images_per_side").get<int>();
  c.query_per_side = j.at("query_per_side").get<int>();
  c.gallery_per_side = j.at("gallery_per_side").get<int>();
  c.pad_train_users = j.at("pad_train_users").get<int>();
  c.pad_test_users = j.at("pad_test_users").get<int>();
  c.pad_live_per_user = j.at("pad_live_per_user").get<int>();
  c.pad_lens_per_user = j.at("pad_lens_per_user").get<int>();
  c.pad_print_per_user = j.at("pad_print_per_user").get<int>();
  c.height = j.at("height").get<int>();
  c.width = j.at("width").get<int>();
  c.noise_scale = j.at("noise_scale").get<double>();
  c.max_shift = j.at("max_shift").get<double>();
  c.max_rotation = j.at("max_rotation").get<double>();
  c.gain_jitter = j.at("gain_jitter").get<double>();
  c.lens_amplitude = j.at("lens_amplitude").get<double>();
  c.lens_amplitude_min = j.at("lens_amplitude_min").get<double>();
  c.ea_lens_fraction = j.at("ea_lens_fraction").get<double>();
  c.min_separation = j.at("min_separation").get<double>();
  c.degradation = degradation_from_string(j.at("degradation").get<std::string>());
  c.ea_train_sides = train_sides_from_string(j.at("ea_train_sides").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

template <typename E>
E enum_from(std::string_view name, std::initializer_list<E> values) {
  for (E v : values)
    if (to_string(v) == name) return v;
  throw IoError("bundle manifest: unknown label '" + std::string(name) + "'");
}

}  // namespace

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  const auto counts = bundle.counts();
  json users = json::array(), sides = json::array(), liveness = json::array(), splits = json::array();
  std::vector<float> blob;
  blob.reserve(bundle.samples.size() * bundle.patch_size());
  for (const auto& s : bundle.samples) {
    users.push_back(s.user_id);
    sides.push_back(to_string(s.side));
    liveness.push_back(to_string(s.liveness));
    splits.push_back(to_string(s.split));
    blob.insert(blob.end(), s.patch.begin(), s.patch.end());
  }
  json manifest = {{"format", kFormat},
                   {"version", kVersion},
                   {"seed", bundle.config.seed},
                   {"degradation", to_string(bundle.config.degradation)},
                   {"patch_shape", {bundle.config.height, bundle.config.width}},
                   {"counts",
                    {{"ea_train", counts.ea_train},
                     {"ea_query", counts.ea_query},
                     {"ea_gallery", counts.ea_gallery},
                     {"pad_train", counts.pad_train},
                     {"pad_test", counts.pad_test},
                     {"total", bundle.samples.size()}}},
                   {"config", config_to_json(bundle.config)},
                   {"samples", {{"user", users}, {"side", sides}, {"liveness", liveness}, {"split", splits}}}};
  io::write_f32_le(dir / "samples.bin", blob);
  io::write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

bool bundle_exists(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "manifest.json") && std::filesystem::exists(dir / "samples.bin");
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  if (!bundle_exists(dir)) throw MissingInputError("no dataset bundle in '" + dir.string() + "'");
  try {
    const json manifest = json::parse(io::read_text(dir / "manifest.json"));
    if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
      throw IoError("'" + (dir / "manifest.json").string() + "' is not a version-1 bundle manifest");
    }
    DatasetBundle bundle;
    bundle.config = config_from_json(manifest.at("config"));
    const auto blob = io::read_f32_le(dir / "samples.bin");
    const auto& cols = manifest.at("samples");
    const std::size_t n = cols.at("user").size();
    const std::size_t patch = bundle.patch_size();
    if (blob.size() != n * patch) {
      throw IoError("samples.bin holds " + std::to_string(blob.size()) + " values, manifest implies " +
                    std::to_string(n * patch));
    }
    bundle.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      EyeSample s;
      s.patch.assign(blob.begin() + static_cast<std::ptrdiff_t>(i * patch),
                     blob.begin() + static_cast<std::ptrdiff_t>((i + 1) * patch));
      s.user_id = cols.at("user").at(i).get<int>();
      s.side = enum_from(cols.at("side").at(i).get<std::string>(), {EyeSide::left, EyeSide::right});
      s.liveness = enum_from(cols.at("liveness").at(i).get<std::string>(),
                             {Liveness::live, Liveness::spoof_lens, Liveness::spoof_print});
      s.split = enum_from(cols.at("split").at(i).get<std::string>(),
                          {Split::ea_train, Split::ea_query, Split::ea_gallery, Split::pad_train, Split::pad_test});
      bundle.samples.push_back(std::move(s));
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bundle manifest: " + std::string(e.what()));
  }
}

}  // namespace eyepad::data

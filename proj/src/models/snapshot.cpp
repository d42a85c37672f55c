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

#include "eyepad/models/snapshot.hpp"

#include <json.hpp>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::models {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "eyepad-model";
constexpr int kVersion = 1;

json spec_to_json(const BackboneSpec& spec) {
  json conv = json::array();
  for (const auto& c : spec.conv_stem) conv.push_back({{"kernel_size", c.kernel_size}, {"channels", c.channels}});
  return {{"input_shape", {spec.height, spec.width}},
          {"conv_stem", conv},
          {"mlp_widths", spec.mlp_widths},
          {"feature_dim", spec.feature_dim},
          {"preset_name", spec.preset_name}};
}

BackboneSpec spec_from_json(const json& j) {
  BackboneSpec spec;
  spec.height = j.at("input_shape").at(0).get<int>();
  spec.width = j.at("input_shape").at(1).get<int>();
  for (const auto& c : j.at("conv_stem"))
    spec.conv_stem.push_back({c.at("kernel_size").get<int>(), c.at("channels").get<int>()});
  spec.mlp_widths = j.at("mlp_widths").get<std::vector<int>>();
  spec.feature_dim = j.at("feature_dim").get<int>();
  spec.preset_name = j.at("preset_name").get<std::string>();
  return spec;
}

std::filesystem::path stem_of(const std::filesystem::path& path) {
  const std::string s = path.string();
  for (const char* suffix : {".model.json", ".model.bin"}) {
    const std::string suf(suffix);
    if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0)
      return s.substr(0, s.size() - suf.size());
  }
  return path;
}

}  // namespace

std::filesystem::path snapshot_stem(const std::filesystem::path& dir, const SnapshotMetadata& meta) {
  return dir / (meta.strategy + "_" + std::to_string(meta.seed));
}

std::filesystem::path save_snapshot(const EmbeddingModel& model, const SnapshotMetadata& meta,
                                    const std::filesystem::path& stem) {
  const auto base = stem_of(stem).string();
  const std::filesystem::path manifest_path = base + ".model.json";
  const std::filesystem::path blob_path = base + ".model.bin";

  json layout = json::array();
  std::size_t offset = 0;
  for (const auto& e : model.params().entries()) {
    layout.push_back({{"name", e.name}, {"shape", e.tensor.shape()}, {"offset", offset}, {"count", e.tensor.size()}});
    offset += e.tensor.size();
  }
  json manifest = {{"format", kFormat},
                   {"version", kVersion},
                   {"spec", spec_to_json(model.spec())},
                   {"metadata", {{"strategy", meta.strategy}, {"epoch", meta.epoch}, {"seed", meta.seed}}},
                   {"frozen", model.frozen()},
                   {"parameters", layout},
                   {"parameter_count", offset},
                   {"blob", blob_path.filename().string()}};
  io::write_f64_le(blob_path, model.params().flat_values());
  io::write_text(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

ModelSnapshot load_snapshot(const std::filesystem::path& path) {
  const auto base = stem_of(path).string();
  const std::filesystem::path manifest_path = base + ".model.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw MissingInputError("snapshot manifest '" + manifest_path.string() + "' not found");
  }
  json manifest;
  try {
    manifest = json::parse(io::read_text(manifest_path));
  } catch (const json::exception& e) {
    throw IoError("snapshot manifest '" + manifest_path.string() + "': " + e.what());
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
    throw IoError("'" + manifest_path.string() + "' is not a version-1 model snapshot");
  }
  try {
    BackboneSpec spec = spec_from_json(manifest.at("spec"));
    const auto blob = io::read_f64_le(manifest_path.parent_path() / manifest.at("blob").get<std::string>());
    if (blob.size() != manifest.at("parameter_count").get<std::size_t>()) {
      throw IoError("snapshot blob size does not match manifest");
    }
    ParamStore params;
    for (const auto& p : manifest.at("parameters")) {
      const auto offset = p.at("offset").get<std::size_t>();
      const auto count = p.at("count").get<std::size_t>();
      if (offset + count > blob.size()) throw IoError("snapshot parameter layout exceeds blob");
      std::vector<double> values(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                                 blob.begin() + static_cast<std::ptrdiff_t>(offset + count));
      params.add(p.at("name").get<std::string>(), ad::Tensor(p.at("shape").get<ad::Shape>(), std::move(values)));
    }
    EmbeddingModel model(std::move(spec), std::move(params));
    if (manifest.value("frozen", false)) model.freeze();
    const auto& m = manifest.at("metadata");
    SnapshotMetadata meta{m.at("strategy").get<std::string>(), m.at("epoch").get<int>(),
                          m.at("seed").get<std::uint64_t>()};
    return {std::move(model), std::move(meta)};
  } catch (const json::exception& e) {
    throw IoError("snapshot manifest '" + manifest_path.string() + "': " + e.what());
  }
}

}  // namespace eyepad::models

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
#include <string>

#include "eyepad/models/model.hpp"

namespace eyepad::models {

struct SnapshotMetadata {
  std::string strategy;
  int epoch = 0;
  std::uint64_t seed = 0;
  bool operator==(const SnapshotMetadata&) const = default;
};

struct ModelSnapshot {
  EmbeddingModel model;
  SnapshotMetadata metadata;
};

// `<dir>/<strategy>_<seed>` without extension.
std::filesystem::path snapshot_stem(const std::filesystem::path& dir, const SnapshotMetadata& meta);

/// Writes `<stem>.model.json` (spec + metadata + parameter layout) and
/// `<stem>.model.bin` (little-endian float64 values in layout order).
/// Returns the manifest path.
std::filesystem::path save_snapshot(const EmbeddingModel& model, const SnapshotMetadata& meta,
                                    const std::filesystem::path& stem);

// Accepts either the manifest path or the stem.
ModelSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace eyepad::models

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
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "eyepad/autodiff/optimizer.hpp"
#include "eyepad/data/synth.hpp"
#include "eyepad/losses/losses.hpp"
#include "eyepad/models/model.hpp"

namespace eyepad::train {

using losses::LossWeights;
using models::EmbeddingModel;

enum class Strategy { ea_only, pad_only, mtl, mtmt, eyepad, eyepadpp };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::ea_only, Strategy::pad_only, Strategy::mtl,
                                              Strategy::mtmt,    Strategy::eyepad,   Strategy::eyepadpp};

struct TrainConfig {
  Strategy strategy = Strategy::eyepadpp;
  int epochs = 30;
  int batch_size = 64;
  int samples_per_class = 4;
  LossWeights weights;
  ad::OptimizerKind optimizer = ad::OptimizerKind::adaptive;
  double lr = 1e-4;
  double gamma = 0.5;
  int decay_after = 12;
  std::uint64_t seed = 1;
  models::Preset preset = models::Preset::medium;
  int feature_dim = 32;
  data::Degradation degradation = data::Degradation::clean;

  /// Optimizer schedule and loss weights of the reference configuration for
  /// a backbone preset and degradation mode (small/medium/large stand in
  /// for the mobile, dense and high-resolution reference backbones).
  static TrainConfig defaults_for(models::Preset preset, data::Degradation degradation);

  void validate() const;
  models::BackboneSpec backbone(int height, int width) const;
};

enum class Task { ea, pad };
std::string_view to_string(Task t);

struct TrainRecord {
  int epoch = 0;
  int iter = 0;
  Task task = Task::ea;
  double loss = 0;
  double loss_task = 0;
  double loss_dis = 0;
  double lr = 0;
};

class TrainLog {
 public:
  void add(const TrainRecord& r) { records_.push_back(r); }
  void append(const TrainLog& other);
  const std::vector<TrainRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // EA, PAD, EA, PAD, ... starting with EA.
  bool strictly_alternates() const;
  // Mean task loss of the first / last epoch for one task.
  double first_epoch_mean(Task task) const;
  double last_epoch_mean(Task task) const;

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<TrainRecord> records_;
};

struct TrainResult {
  EmbeddingModel model;
  TrainLog log;
};

struct EyePadResult {
  EmbeddingModel teacher;  // frozen
  EmbeddingModel student;
  TrainLog log;            // teacher run then student run
};

/// Yields class-balanced EA batches of batch_size / S groups, each group S
/// samples of one class. A class with enough images may supply more than one
/// group to the same batch. Groups are reshuffled on every pass.
class EaBatchSampler {
 public:
  EaBatchSampler(const data::EaTrainSet& set, int batch_size, int samples_per_class, std::uint64_t seed);
  losses::EaBatch next();
  int batches_per_pass() const { return batches_per_pass_; }

 private:
  void reshuffle();
  const data::EaTrainSet* set_;
  std::size_t patch_size_;
  int groups_per_batch_;
  int samples_per_class_;
  int batches_per_pass_ = 0;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::size_t>> groups_;
  std::size_t cursor_ = 0;
};

/// Shuffled PAD batches; the final partial batch of a pass is kept.
class PadBatchSampler {
 public:
  PadBatchSampler(const data::PadSet& set, int batch_size, std::uint64_t seed);
  losses::PadBatch next();
  int batches_per_pass() const { return batches_per_pass_; }

 private:
  void reshuffle();
  const data::PadSet* set_;
  std::size_t patch_size_;
  int batch_size_;
  int batches_per_pass_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Fresh model for a config: initialization depends only on cfg.seed.
EmbeddingModel init_model(const TrainConfig& cfg, int height, int width);

TrainResult train_ea_only(const TrainConfig& cfg, const data::EaTrainSet& ea);
TrainResult train_pad_only(const TrainConfig& cfg, const data::PadSet& pad);
TrainResult train_mtl(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad);

// Plain sequential fine-tuning of a copy of `start` on PAD data.
TrainResult train_finetune_pad(const TrainConfig& cfg, const data::PadSet& pad, const EmbeddingModel& start);

// Teacher on EA, then a student on PAD with feature distillation.
EyePadResult train_eyepad(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad);
// Student stage only, from an already trained teacher (which is frozen in place).
TrainResult train_eyepad_student(const TrainConfig& cfg, const data::PadSet& pad, EmbeddingModel& teacher);

// Returns the refined student; the log covers this stage only.
TrainResult train_eyepadpp(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad);
TrainResult train_eyepadpp_from(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad,
                                EmbeddingModel& eyepad_student);

// Returns the MTL student; the log covers the student only.
TrainResult train_mtmt(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad);
TrainResult train_mtmt_from(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad,
                            EmbeddingModel& auth_teacher, EmbeddingModel& pad_teacher);

}  // namespace eyepad::train

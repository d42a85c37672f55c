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

#include "eyepad/train/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::train {
namespace {

using ad::Tape;
using data::Degradation;
using models::Preset;

struct ReferenceRow {
  double lambda1, lambda2, lambda_auth, lambda_pad;
};

ReferenceRow reference_row(Preset preset, Degradation d) {
  const int k = static_cast<int>(d);
  switch (preset) {
    case Preset::medium: {
      static constexpr ReferenceRow rows[] = {{2.0, 0.75, 1.0, 1.0}, {1.0, 2.0, 0.75, 0.75}, {1.0, 2.0, 0.5, 0.75}};
      return rows[k];
    }
    case Preset::large: {
      static constexpr ReferenceRow rows[] = {{2.0, 2.0, 1.0, 1.0}, {5.0, 2.0, 0.75, 0.75}, {2.0, 5.0, 2.0, 2.0}};
      return rows[k];
    }
    case Preset::small: {
      static constexpr ReferenceRow rows[] = {{1.0, 0.75, 1.0, 2.0}, {1.0, 0.75, 1.0, 1.0}, {5.0, 2.0, 0.1, 0.1}};
      return rows[k];
    }
  }
  return {};
}

std::string csv_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<const std::vector<float>*> patches_of(const std::vector<const data::EyeSample*>& samples,
                                                  const std::vector<std::size_t>& idx) {
  std::vector<const std::vector<float>*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(&samples[i]->patch);
  return out;
}

using EaLossFn = std::function<losses::LossTerms(Tape&, const losses::EaBatch&)>;
using PadLossFn = std::function<losses::LossTerms(Tape&, const losses::PadBatch&)>;

template <typename Batch>
void step(const TrainConfig& cfg, EmbeddingModel& model, const Batch& batch,
          const std::function<losses::LossTerms(Tape&, const Batch&)>& loss, TrainLog& log, int epoch,
          int& iter, Task task, double lr) {
  Tape tape;
  auto terms = loss(tape, batch);
  tape.backward(terms.total);
  ad::optimizer_step(model.params(), lr, cfg.optimizer, ad::UnusedGrad::skip);
  log.add({epoch, iter++, task, terms.total.item(), terms.task.item(), terms.dis.item(), lr});
}

void run_ea(const TrainConfig& cfg, EmbeddingModel& model, const data::EaTrainSet& ea, const EaLossFn& loss,
            TrainLog& log) {
  EaBatchSampler sampler(ea, cfg.batch_size, cfg.samples_per_class, io::derive_seed(cfg.seed, "ea_batches"));
  int iter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = ad::lr_decay(cfg.lr, epoch, cfg.gamma, cfg.decay_after);
    for (int b = 0; b < sampler.batches_per_pass(); ++b)
      step<losses::EaBatch>(cfg, model, sampler.next(), loss, log, epoch, iter, Task::ea, lr);
  }
}

void run_pad(const TrainConfig& cfg, EmbeddingModel& model, const data::PadSet& pad, const PadLossFn& loss,
             TrainLog& log) {
  PadBatchSampler sampler(pad, cfg.batch_size, io::derive_seed(cfg.seed, "pad_batches"));
  int iter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = ad::lr_decay(cfg.lr, epoch, cfg.gamma, cfg.decay_after);
    for (int b = 0; b < sampler.batches_per_pass(); ++b)
      step<losses::PadBatch>(cfg, model, sampler.next(), loss, log, epoch, iter, Task::pad, lr);
  }
}

// One EA and one PAD iteration per step; an epoch ends when the longer
// task has been seen once, the shorter one cycles.
void run_alternating(const TrainConfig& cfg, EmbeddingModel& model, const data::EaTrainSet& ea,
                     const data::PadSet& pad, const EaLossFn& ea_loss, const PadLossFn& pad_loss, TrainLog& log) {
  EaBatchSampler ea_sampler(ea, cfg.batch_size, cfg.samples_per_class, io::derive_seed(cfg.seed, "ea_batches"));
  PadBatchSampler pad_sampler(pad, cfg.batch_size, io::derive_seed(cfg.seed, "pad_batches"));
  const int pairs = std::max(ea_sampler.batches_per_pass(), pad_sampler.batches_per_pass());
  int iter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = ad::lr_decay(cfg.lr, epoch, cfg.gamma, cfg.decay_after);
    for (int b = 0; b < pairs; ++b) {
      step<losses::EaBatch>(cfg, model, ea_sampler.next(), ea_loss, log, epoch, iter, Task::ea, lr);
      step<losses::PadBatch>(cfg, model, pad_sampler.next(), pad_loss, log, epoch, iter, Task::pad, lr);
    }
  }
}

void check_ea(const data::EaTrainSet& ea) {
  if (ea.num_classes < 2) throw PreconditionError("EA training data needs at least 2 identity classes");
}

void check_pad(const data::PadSet& pad) {
  const bool live = std::find(pad.labels.begin(), pad.labels.end(), 0) != pad.labels.end();
  const bool spoof = std::find(pad.labels.begin(), pad.labels.end(), 1) != pad.labels.end();
  if (pad.samples.empty() || !live) throw PreconditionError("PAD training data needs live samples");
  // A single-class PAD set is legal: it still defines a cross-entropy target.
  (void)spoof;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::ea_only: return "ea_only";
    case Strategy::pad_only: return "pad_only";
    case Strategy::mtl: return "mtl";
    case Strategy::mtmt: return "mtmt";
    case Strategy::eyepad: return "eyepad";
    case Strategy::eyepadpp: return "eyepadpp";
  }
  return "ea_only";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Task t) { return t == Task::ea ? "EA" : "PAD"; }

TrainConfig TrainConfig::defaults_for(Preset preset, Degradation degradation) {
  TrainConfig cfg;
  cfg.preset = preset;
  cfg.degradation = degradation;
  const auto row = reference_row(preset, degradation);
  cfg.weights.lambda1 = row.lambda1;
  cfg.weights.lambda2 = row.lambda2;
  cfg.weights.lambda_auth = row.lambda_auth;
  cfg.weights.lambda_pad = row.lambda_pad;
  if (preset == Preset::small) {
    cfg.optimizer = ad::OptimizerKind::sgd;
    cfg.lr = 0.1;
    cfg.gamma = 0.1;
    cfg.decay_after = 15;
  } else {
    cfg.optimizer = ad::OptimizerKind::adaptive;
    cfg.lr = 1e-4;
    cfg.gamma = 0.5;
    cfg.decay_after = 12;
  }
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (samples_per_class < 2) throw ConfigError("train.samples_per_class must be >= 2");
  if (batch_size < 8 || batch_size % samples_per_class != 0) {
    throw ConfigError("train.batch_size must be >= 8 and divisible by samples_per_class");
  }
  if (batch_size / samples_per_class < 2) throw ConfigError("train.batch_size must hold at least 2 classes");
  if (!(lr > 0)) throw ConfigError("train.lr must be > 0");
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("train.gamma must be in (0,1]");
  if (decay_after < 1) throw ConfigError("train.decay_after must be >= 1");
  if (feature_dim < 2) throw ConfigError("train.feature_dim must be >= 2");
  weights.validate();
}

models::BackboneSpec TrainConfig::backbone(int height, int width) const {
  return models::BackboneSpec::preset(preset, feature_dim, height, width);
}

void TrainLog::append(const TrainLog& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

bool TrainLog::strictly_alternates() const {
  if (records_.empty()) return false;
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (records_[i].task != (i % 2 == 0 ? Task::ea : Task::pad)) return false;
  return true;
}

namespace {

double epoch_mean(const std::vector<TrainRecord>& records, Task task, bool first) {
  int target = -1;
  for (const auto& r : records) {
    if (r.task != task) continue;
    target = target < 0 ? r.epoch : (first ? std::min(target, r.epoch) : std::max(target, r.epoch));
  }
  if (target < 0) throw PreconditionError("train log has no records for task " + std::string(to_string(task)));
  double total = 0;
  int n = 0;
  for (const auto& r : records)
    if (r.task == task && r.epoch == target) {
      total += r.loss_task;
      ++n;
    }
  return total / n;
}

}  // namespace

double TrainLog::first_epoch_mean(Task task) const { return epoch_mean(records_, task, true); }
double TrainLog::last_epoch_mean(Task task) const { return epoch_mean(records_, task, false); }

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,iter,task,loss,loss_task,loss_dis,lr\n";
  for (const auto& r : records_) {
    out << r.epoch << ',' << r.iter << ',' << to_string(r.task) << ',' << csv_number(r.loss) << ','
        << csv_number(r.loss_task) << ',' << csv_number(r.loss_dis) << ',' << csv_number(r.lr) << '\n';
  }
  return out.str();
}

void TrainLog::write_csv(const std::filesystem::path& path) const { io::write_text(path, to_csv()); }

EaBatchSampler::EaBatchSampler(const data::EaTrainSet& set, int batch_size, int samples_per_class,
                               std::uint64_t seed)
    : set_(&set),
      patch_size_(set.samples.empty() ? 0 : set.samples.front()->patch.size()),
      groups_per_batch_(batch_size / samples_per_class),
      samples_per_class_(samples_per_class),
      rng_(seed) {
  check_ea(set);
  std::map<int, int> per_class;
  for (int l : set.labels) ++per_class[l];
  int groups = 0;
  for (const auto& [label, count] : per_class) groups += count / samples_per_class;
  batches_per_pass_ = groups / groups_per_batch_;
  if (batches_per_pass_ < 1) {
    throw PreconditionError("EA data too small for one batch of " + std::to_string(groups_per_batch_) +
                            " classes x " + std::to_string(samples_per_class) + " samples");
  }
  reshuffle();
}

void EaBatchSampler::reshuffle() {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < set_->labels.size(); ++i) by_class[set_->labels[i]].push_back(i);
  groups_.clear();
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng_);
    const std::size_t s = static_cast<std::size_t>(samples_per_class_);
    for (std::size_t start = 0; start + s <= idx.size(); start += s)
      groups_.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                           idx.begin() + static_cast<std::ptrdiff_t>(start + s));
  }
  std::shuffle(groups_.begin(), groups_.end(), rng_);
  cursor_ = 0;
}

losses::EaBatch EaBatchSampler::next() {
  if (cursor_ + static_cast<std::size_t>(groups_per_batch_) > groups_.size()) reshuffle();
  std::vector<std::size_t> idx;
  for (int g = 0; g < groups_per_batch_; ++g) {
    const auto& group = groups_[cursor_++];
    idx.insert(idx.end(), group.begin(), group.end());
  }
  losses::EaBatch batch;
  batch.images = models::make_batch(patches_of(set_->samples, idx), patch_size_);
  for (auto i : idx) batch.labels.push_back(set_->labels[i]);
  return batch;
}

PadBatchSampler::PadBatchSampler(const data::PadSet& set, int batch_size, std::uint64_t seed)
    : set_(&set),
      patch_size_(set.samples.empty() ? 0 : set.samples.front()->patch.size()),
      batch_size_(batch_size),
      batches_per_pass_(static_cast<int>((set.samples.size() + static_cast<std::size_t>(batch_size) - 1) /
                                         static_cast<std::size_t>(batch_size))),
      rng_(seed) {
  check_pad(set);
  reshuffle();
}

void PadBatchSampler::reshuffle() {
  order_.resize(set_->samples.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

losses::PadBatch PadBatchSampler::next() {
  if (cursor_ >= order_.size()) reshuffle();
  const std::size_t end = std::min(order_.size(), cursor_ + static_cast<std::size_t>(batch_size_));
  std::vector<std::size_t> idx(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                               order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  losses::PadBatch batch;
  batch.images = models::make_batch(patches_of(set_->samples, idx), patch_size_);
  for (auto i : idx) batch.labels.push_back(set_->labels[i]);
  return batch;
}

EmbeddingModel init_model(const TrainConfig& cfg, int height, int width) {
  return EmbeddingModel(cfg.backbone(height, width), io::derive_seed(cfg.seed, "init"));
}

namespace {

std::pair<int, int> dims_of(const std::vector<const data::EyeSample*>& samples) {
  if (samples.empty()) throw PreconditionError("training data is empty");
  const auto n = samples.front()->patch.size();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(side) * static_cast<std::size_t>(side) != n) {
    throw PreconditionError("training patches must be square");
  }
  return {side, side};
}

EmbeddingModel init_for(const TrainConfig& cfg, const std::vector<const data::EyeSample*>& samples) {
  const auto [h, w] = dims_of(samples);
  return init_model(cfg, h, w);
}

}  // namespace

TrainResult train_ea_only(const TrainConfig& cfg, const data::EaTrainSet& ea) {
  cfg.validate();
  check_ea(ea);
  EmbeddingModel model = init_for(cfg, ea.samples);
  TrainLog log;
  run_ea(cfg, model, ea, [&](Tape& t, const losses::EaBatch& b) { return losses::ea_task(t, b, model, cfg.weights); },
         log);
  return {std::move(model), std::move(log)};
}

TrainResult train_pad_only(const TrainConfig& cfg, const data::PadSet& pad) {
  cfg.validate();
  check_pad(pad);
  EmbeddingModel model = init_for(cfg, pad.samples);
  TrainLog log;
  run_pad(cfg, model, pad, [&](Tape& t, const losses::PadBatch& b) { return losses::pad_task(t, b, model); }, log);
  return {std::move(model), std::move(log)};
}

TrainResult train_mtl(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad) {
  cfg.validate();
  check_ea(ea);
  check_pad(pad);
  EmbeddingModel model = init_for(cfg, ea.samples);
  TrainLog log;
  run_alternating(
      cfg, model, ea, pad,
      [&](Tape& t, const losses::EaBatch& b) { return losses::ea_task(t, b, model, cfg.weights); },
      [&](Tape& t, const losses::PadBatch& b) { return losses::pad_task(t, b, model); }, log);
  return {std::move(model), std::move(log)};
}

TrainResult train_finetune_pad(const TrainConfig& cfg, const data::PadSet& pad, const EmbeddingModel& start) {
  cfg.validate();
  check_pad(pad);
  EmbeddingModel model = start.clone_init();
  TrainLog log;
  run_pad(cfg, model, pad, [&](Tape& t, const losses::PadBatch& b) { return losses::pad_task(t, b, model); }, log);
  return {std::move(model), std::move(log)};
}

TrainResult train_eyepad_student(const TrainConfig& cfg, const data::PadSet& pad, EmbeddingModel& teacher) {
  cfg.validate();
  check_pad(pad);
  teacher.freeze();
  EmbeddingModel student = teacher.clone_init();
  TrainLog log;
  run_pad(
      cfg, student, pad,
      [&](Tape& t, const losses::PadBatch& b) { return losses::eyepad_multi(t, b, student, teacher, cfg.weights); },
      log);
  return {std::move(student), std::move(log)};
}

EyePadResult train_eyepad(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad) {
  auto step1 = train_ea_only(cfg, ea);
  auto step2 = train_eyepad_student(cfg, pad, step1.model);
  TrainLog log = std::move(step1.log);
  log.append(step2.log);
  return {std::move(step1.model), std::move(step2.model), std::move(log)};
}

TrainResult train_eyepadpp_from(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad,
                                EmbeddingModel& eyepad_student) {
  cfg.validate();
  check_ea(ea);
  check_pad(pad);
  eyepad_student.freeze();
  EmbeddingModel model = eyepad_student.clone_init();
  TrainLog log;
  run_alternating(
      cfg, model, ea, pad,
      [&](Tape& t, const losses::EaBatch& b) { return losses::eyepadpp_id(t, b, model, eyepad_student, cfg.weights); },
      [&](Tape& t, const losses::PadBatch& b) { return losses::eyepadpp_pad(t, b, model, eyepad_student, cfg.weights); },
      log);
  return {std::move(model), std::move(log)};
}

TrainResult train_eyepadpp(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad) {
  auto eyepad = train_eyepad(cfg, ea, pad);
  return train_eyepadpp_from(cfg, ea, pad, eyepad.student);
}

TrainResult train_mtmt_from(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad,
                            EmbeddingModel& auth_teacher, EmbeddingModel& pad_teacher) {
  cfg.validate();
  check_ea(ea);
  check_pad(pad);
  auth_teacher.freeze();
  pad_teacher.freeze();
  EmbeddingModel model = init_for(cfg, ea.samples);
  TrainLog log;
  run_alternating(
      cfg, model, ea, pad,
      [&](Tape& t, const losses::EaBatch& b) {
        return losses::mtmt_id(t, b, model, auth_teacher, pad_teacher, cfg.weights);
      },
      [&](Tape& t, const losses::PadBatch& b) {
        return losses::mtmt_pad(t, b, model, auth_teacher, pad_teacher, cfg.weights);
      },
      log);
  return {std::move(model), std::move(log)};
}

TrainResult train_mtmt(const TrainConfig& cfg, const data::EaTrainSet& ea, const data::PadSet& pad) {
  auto auth = train_ea_only(cfg, ea);
  auto pad_teacher = train_pad_only(cfg, pad);
  return train_mtmt_from(cfg, ea, pad, auth.model, pad_teacher.model);
}

}  // namespace eyepad::train

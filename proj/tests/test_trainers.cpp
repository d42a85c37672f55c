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

#include <doctest.h>

#include <map>
#include <set>

#include "eyepad/error.hpp"
#include "eyepad/eval/protocols.hpp"
#include "eyepad/train/trainers.hpp"
#include "support/testkit.hpp"

using namespace eyepad;
using namespace eyepad::train;

namespace {

const data::DatasetBundle& tiny_bundle() {
  static const data::DatasetBundle b = data::build_bundle(testkit::tiny_data_config());
  return b;
}

}  // namespace

TEST_CASE("config validation and reference defaults") {
  TrainConfig c;
  c.validate();
  auto bad = c;
  bad.batch_size = 30;  // not divisible by 4
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.lr = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.samples_per_class = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const auto small = TrainConfig::defaults_for(models::Preset::small, data::Degradation::clean);
  CHECK(small.optimizer == ad::OptimizerKind::sgd);
  CHECK(small.lr == 0.1);
  CHECK(small.gamma == 0.1);
  CHECK(small.decay_after == 15);
  const auto medium = TrainConfig::defaults_for(models::Preset::medium, data::Degradation::clean);
  CHECK(medium.optimizer == ad::OptimizerKind::adaptive);
  CHECK(medium.lr == 1e-4);
  CHECK(medium.weights.lambda1 == 2.0);
  CHECK(medium.weights.lambda2 == 0.75);
  for (auto s : kAllStrategies) CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("nope"), ConfigError);
}

TEST_CASE("EA batches hold P classes of S samples") {
  const auto ea = data::ea_train_set(tiny_bundle());
  EaBatchSampler sampler(ea, 8, 2, 3);
  CHECK(sampler.batches_per_pass() == 6);
  for (int i = 0; i < 20; ++i) {
    const auto b = sampler.next();
    CHECK(b.images.shape()[0] == 8);
    std::map<int, int> counts;
    for (int l : b.labels) ++counts[l];
    CHECK(counts.size() >= 2);
    for (const auto& [label, n] : counts) CHECK(n % 2 == 0);
  }
}

TEST_CASE("PAD batches cover every sample once per pass") {
  const auto pad = data::pad_set(tiny_bundle(), data::Split::pad_train);
  PadBatchSampler sampler(pad, 8, 4);
  const int passes = sampler.batches_per_pass();
  CHECK(passes == static_cast<int>((pad.samples.size() + 7) / 8));
  std::size_t rows = 0;
  int spoofs = 0;
  for (int i = 0; i < passes; ++i) {
    const auto b = sampler.next();
    rows += b.images.shape()[0];
    for (int l : b.labels) spoofs += l;
  }
  CHECK(rows == pad.samples.size());
  int expected = 0;
  for (int l : pad.labels) expected += l;
  CHECK(spoofs == expected);
}

TEST_CASE("training is deterministic and lowers the objective") {
  const auto ea = data::ea_train_set(tiny_bundle());
  auto cfg = testkit::tiny_train_config();
  cfg.epochs = 12;
  cfg.decay_after = 6;
  const auto a = train_ea_only(cfg, ea);
  const auto b = train_ea_only(cfg, ea);
  CHECK(testkit::max_log_gap(a.log, b.log) == 0.0);
  CHECK(testkit::parameter_bytes(a.model) == testkit::parameter_bytes(b.model));
  CHECK(a.log.last_epoch_mean(Task::ea) < a.log.first_epoch_mean(Task::ea));
  CHECK(a.log.records().back().lr == doctest::Approx(cfg.lr * cfg.gamma));

  const auto pad = data::pad_set(tiny_bundle(), data::Split::pad_train);
  const auto p = train_pad_only(cfg, pad);
  CHECK(p.log.last_epoch_mean(Task::pad) < p.log.first_epoch_mean(Task::pad));
}

TEST_CASE("joint strategies alternate EA and PAD steps") {
  const auto ea = data::ea_train_set(tiny_bundle());
  const auto pad = data::pad_set(tiny_bundle(), data::Split::pad_train);
  const auto cfg = testkit::tiny_train_config();
  const auto mtl = train_mtl(cfg, ea, pad);
  CHECK(mtl.log.strictly_alternates());
  CHECK(mtl.log.size() == 2u * 2 * 6);  // epochs x max(6 EA, 5 PAD) pairs
  CHECK(train_eyepadpp(cfg, ea, pad).log.strictly_alternates());
  CHECK(train_mtmt(cfg, ea, pad).log.strictly_alternates());
  const auto eyepad = train_eyepad(cfg, ea, pad);
  std::size_t ea_steps = 0;
  for (const auto& r : eyepad.log.records()) ea_steps += r.task == Task::ea;
  CHECK(ea_steps == 2u * 6);
  CHECK(eyepad.teacher.frozen());
  CHECK_FALSE(eyepad.student.frozen());
}

TEST_CASE("zero distillation weights reproduce the naive schedules") {
  const auto r = testkit::reduction_identities(tiny_bundle(), testkit::tiny_train_config());
  CHECK(r.eyepad_iters > 0);
  CHECK(r.eyepad_gap <= 1e-12);
  CHECK(r.eyepad_params_equal);
  CHECK(r.mtmt_iters > 0);
  CHECK(r.mtmt_gap <= 1e-12);
  CHECK(r.mtmt_params_equal);
}

TEST_CASE("teachers stay byte-identical") {
  const auto r = testkit::freeze_invariants(tiny_bundle(), testkit::tiny_train_config());
  CHECK(r.eyepad);
  CHECK(r.eyepadpp);
  CHECK(r.mtmt);
}

TEST_CASE("a very large distillation weight pins the student to its teacher") {
  const auto ea = data::ea_train_set(tiny_bundle());
  const auto pad = data::pad_set(tiny_bundle(), data::Split::pad_train);
  auto cfg = testkit::tiny_train_config();
  cfg.epochs = 4;
  cfg.weights.lambda1 = 1e4;
  auto r = train_eyepad(cfg, ea, pad);
  const auto fs = eval::encode_samples(r.student, pad.samples).features;
  const auto ft = eval::encode_samples(r.teacher, pad.samples).features;
  double worst = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) worst = std::max(worst, 1 - eval::cosine_similarity(fs[i], ft[i]));
  CHECK(worst < 0.05);
}

TEST_CASE("degenerate data is rejected") {
  data::EaTrainSet one_class;
  one_class.num_classes = 1;
  CHECK_THROWS_AS(train_ea_only(testkit::tiny_train_config(), one_class), PreconditionError);
  data::PadSet spoof_only;
  CHECK_THROWS_AS(train_pad_only(testkit::tiny_train_config(), spoof_only), PreconditionError);
}

TEST_CASE("train log csv") {
  TrainLog log;
  log.add({0, 0, Task::ea, 1.5, 1.0, 0.25, 1e-3});
  log.add({0, 1, Task::pad, 0.5, 0.5, 0.0, 1e-3});
  const auto csv = log.to_csv();
  CHECK(csv.rfind("epoch,iter,task,loss,loss_task,loss_dis,lr\n", 0) == 0);
  CHECK(csv.find("0,0,EA,1.5,1,0.25,0.001") != std::string::npos);
  CHECK(log.strictly_alternates());
}

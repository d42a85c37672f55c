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

#include <fstream>

#include "eyepad/error.hpp"
#include "eyepad/models/model.hpp"
#include "eyepad/models/snapshot.hpp"
#include "support/testkit.hpp"

using namespace eyepad;
using namespace eyepad::models;
using testkit::Gen;

namespace {

Tensor random_batch(Gen& g, std::size_t n, std::size_t size) {
  std::vector<double> v(n * size);
  for (double& x : v) x = g.uniform(0.0, 1.0);
  return Tensor::matrix(n, size, std::move(v));
}

std::vector<double> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

TEST_CASE("feature and logit shapes follow the spec") {
  Gen g(1);
  for (auto preset : {Preset::small, Preset::medium, Preset::large}) {
    EmbeddingModel m(BackboneSpec::preset(preset, 16, 16, 16), 3);
    Tape tape(Tape::Mode::inference);
    auto out = m.forward(tape, random_batch(g, 4, 256));
    CHECK(out.features.shape() == ad::Shape{4, 16});
    CHECK(out.logits.shape() == ad::Shape{4});
  }
}

TEST_CASE("forward is deterministic and row-wise") {
  Gen g(2);
  EmbeddingModel m(BackboneSpec::preset(Preset::medium, 8, 12, 12), 4);
  auto row = random_batch(g, 1, 144);
  std::vector<double> twice(row.values().begin(), row.values().end());
  twice.insert(twice.end(), row.values().begin(), row.values().end());
  const auto f = m.features(Tensor::matrix(2, 144, twice));
  CHECK(f[0] == f[1]);
  m.freeze();
  auto batch = random_batch(g, 5, 144);
  CHECK(m.features(batch) == m.features(batch));
  CHECK(m.spoof_probabilities(batch) == m.spoof_probabilities(batch));
}

TEST_CASE("batch shape errors") {
  EmbeddingModel m(BackboneSpec::preset(Preset::small, 8, 10, 10), 4);
  Tape tape;
  CHECK_THROWS_AS(m.forward(tape, Tensor::matrix(2, 99, std::vector<double>(198, 0.0))), ShapeError);
  CHECK_THROWS_AS(m.forward(tape, Tensor::vector(std::vector<double>(100, 0.0))), ShapeError);
}

TEST_CASE("logistic map") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(-50.0) < 1e-20);
  CHECK(logistic(50.0) == doctest::Approx(1.0).epsilon(1e-15));
  Gen g(5);
  EmbeddingModel m(BackboneSpec::preset(Preset::medium, 8, 12, 12), 6);
  for (double p : m.spoof_probabilities(random_batch(g, 20, 144))) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("clone_init copies values into independent storage") {
  Gen g(3);
  EmbeddingModel teacher(BackboneSpec::preset(Preset::medium, 8, 12, 12), 9);
  teacher.freeze();
  auto student = teacher.clone_init();
  CHECK_FALSE(student.frozen());
  auto batch = random_batch(g, 3, 144);
  CHECK(student.features(batch) == teacher.features(batch));
  const auto before = teacher.features(batch);
  auto flat = student.params().flat_values();
  for (double& v : flat) v += 0.5;
  student.params().load_flat(flat);
  CHECK(teacher.features(batch) == before);
  CHECK(student.features(batch) != before);
}

TEST_CASE("frozen models reject mutation and ignore optimizer steps") {
  Gen g(4);
  EmbeddingModel m(BackboneSpec::preset(Preset::small, 8, 10, 10), 1);
  m.freeze();
  const auto before = m.params().flat_values();
  const std::vector<double> zeros(m.params().get("pad.bias").size(), 0.0);
  CHECK_THROWS_AS(m.params().set_values("pad.bias", zeros), FrozenError);
  CHECK_THROWS_AS(m.params().load_flat(before), FrozenError);
  Tape tape;
  m.forward(tape, random_batch(g, 2, 100));
  CHECK(tape.size() == 0);  // nothing upstream requires a gradient
  ad::optimizer_step(m.params(), 0.1, ad::OptimizerKind::sgd);
  CHECK(m.params().flat_values() == before);
}

TEST_CASE("snapshot round trip") {
  testkit::TempDir dir("snapshot");
  Gen g(8);
  EmbeddingModel m(BackboneSpec::preset(Preset::medium, 8, 12, 12), 77);
  SnapshotMetadata meta{"ea_only", 30, 77};
  const auto path = save_snapshot(m, meta, snapshot_stem(dir.path(), meta));
  CHECK(std::filesystem::exists(path));
  const auto loaded = load_snapshot(path);
  CHECK(loaded.metadata == meta);
  CHECK(loaded.model.spec() == m.spec());
  CHECK(loaded.model.params().flat_values() == m.params().flat_values());
  auto batch = random_batch(g, 4, 144);
  CHECK(loaded.model.features(batch) == m.features(batch));
  CHECK_THROWS_AS(load_snapshot(dir.path() / "missing_1"), MissingInputError);
}

TEST_CASE("parameters must match the spec") {
  EmbeddingModel a(BackboneSpec::preset(Preset::small, 8, 10, 10), 1);
  CHECK_THROWS_AS(EmbeddingModel(BackboneSpec::preset(Preset::small, 4, 10, 10), a.params().deep_copy()),
                  ShapeError);
  CHECK_THROWS_AS(BackboneSpec::preset(Preset::small, 1, 10, 10).validate(), PreconditionError);
}

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

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "eyepad/autodiff/ops.hpp"
#include "eyepad/autodiff/optimizer.hpp"
#include "eyepad/error.hpp"
#include "eyepad/data/synth.hpp"
#include "support/testkit.hpp"

using namespace eyepad;
using namespace eyepad::data;

namespace {

const DatasetBundle& default_bundle() {
  static const DatasetBundle bundle = build_bundle(DataConfig{});
  return bundle;
}

}  // namespace

TEST_CASE("user latents") {
  const auto users = generate_users(60, 40, 3);
  CHECK(users.latents.size() == 200);
  CHECK(users.train_users.size() == 60);
  CHECK(users.test_users.size() == 40);
  std::set<int> train(users.train_users.begin(), users.train_users.end());
  for (int u : users.test_users) CHECK(train.count(u) == 0);
  for (std::size_t i = 0; i < users.latents.size(); ++i)
    for (std::size_t j = i + 1; j < users.latents.size(); ++j)
      CHECK(latent_separation(users.latents[i], users.latents[j]) >= kDefaultSeparation);
  const auto again = generate_users(60, 40, 3);
  for (std::size_t i = 0; i < users.latents.size(); ++i) {
    CHECK(again.latents[i].freq_u == users.latents[i].freq_u);
    CHECK(again.latents[i].phase == users.latents[i].phase);
  }
  CHECK(users.at(users.test_users[0], EyeSide::right).side == EyeSide::right);
  CHECK_THROWS_AS(generate_users(60, 40, 3, 0.9), PreconditionError);
  CHECK_THROWS_AS(generate_users(1, 40, 3), PreconditionError);
}

TEST_CASE("renders") {
  const auto latent = generate_users(2, 2, 1).latents[0];
  SUBCASE("noise-free renders are identical") {
    CHECK(render_sample(latent, Liveness::live, 0.0, 1) == render_sample(latent, Liveness::live, 0.0, 2));
  }
  SUBCASE("print spoofs hold two gray levels before jitter") {
    const auto p = render_sample(latent, Liveness::spoof_print, 0.0, 1);
    CHECK(std::set<float>(p.begin(), p.end()).size() <= 2);
  }
  SUBCASE("lens spoofs differ from live only inside the iris") {
    const auto live = render_sample(latent, Liveness::live, 0.0, 1);
    const auto lens = render_sample(latent, Liveness::spoof_lens, 0.0, 1);
    CHECK(live != lens);
    CHECK(live.front() == lens.front());  // corner is skin
  }
  SUBCASE("jitter has the folded-normal mean absolute difference") {
    const double sigma = 0.02;
    const auto clean = render_sample(latent, Liveness::live, 0.0, 0);
    double total = 0;
    long count = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto a = render_sample(latent, Liveness::live, sigma, 2 * s + 1);
      const auto b = render_sample(latent, Liveness::live, sigma, 2 * s + 2);
      for (std::size_t k = 0; k < clean.size(); ++k) {
        if (clean[k] < 0.15 || clean[k] > 0.85) continue;
        total += std::abs(static_cast<double>(a[k]) - b[k]);
        ++count;
      }
    }
    // a - b ~ N(0, 2 sigma^2), so E|a - b| = 2 sigma / sqrt(pi).
    const double expected = 2 * sigma / std::sqrt(std::numbers::pi);
    CHECK(std::abs(total / count - expected) < 0.02 * expected);
  }
  SUBCASE("pixels stay in [0,1]") {
    for (auto l : {Liveness::live, Liveness::spoof_lens, Liveness::spoof_print}) {
      RenderOptions opts;
      opts.lens_amplitude = 0.5;
      opts.nuisance.gain = 1.3;
      for (float v : render_sample(latent, l, 0.3, 4, opts)) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
    }
  }
}

TEST_CASE("blur") {
  std::vector<float> impulse(49, 0.0f);
  impulse[24] = 1.0f;
  CHECK(degrade_blur(impulse, 7, 7, 1) == impulse);
  const std::vector<float> flat(64, 0.37f);
  for (float v : degrade_blur(flat, 8, 8, 5)) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
  const auto k = gaussian_kernel(3);
  CHECK(k.size() == 3);
  CHECK(k[0] + k[1] + k[2] == doctest::Approx(1.0).epsilon(1e-15));
  // sigma = 0.8 for size 3.
  const double e = std::exp(-1.0 / (2 * 0.8 * 0.8));
  CHECK(k[0] == doctest::Approx(e / (1 + 2 * e)).epsilon(1e-12));
  const auto out = degrade_blur(impulse, 7, 7, 3);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const int di = i - 3, dj = j - 3;
      const double expected = (std::abs(di) <= 1 && std::abs(dj) <= 1) ? k[di + 1] * k[dj + 1] : 0.0;
      CHECK(out[i * 7 + j] == doctest::Approx(expected).epsilon(1e-6));
    }
  CHECK_THROWS_AS(degrade_blur(impulse, 7, 7, 4), PreconditionError);
}

TEST_CASE("additive noise") {
  const std::vector<float> mid(4096, 0.5f);
  CHECK(degrade_noise(mid, 0.0, 3) == mid);
  const auto out = degrade_noise(mid, kNoiseSigma, 3);
  double var = 0;
  for (std::size_t i = 0; i < out.size(); ++i) var += std::pow(static_cast<double>(out[i]) - mid[i], 2);
  var /= static_cast<double>(out.size());
  CHECK(std::abs(var - kNoiseSigma * kNoiseSigma) < 0.1 * kNoiseSigma * kNoiseSigma);
  std::vector<float> edge(1000, 1.0f);
  for (float v : degrade_noise(edge, 0.5, 9)) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("default bundle layout") {
  const auto& b = default_bundle();
  const auto c = b.counts();
  CHECK(c.ea_train == 60u * 2 * 20);
  CHECK(c.ea_query == 40u * 20);
  CHECK(c.ea_gallery == 40u * 10);
  CHECK(c.pad_train == 30u * 40);
  CHECK(c.pad_test == 30u * 40);
  const auto query = images_by_user(b, Split::ea_query);
  CHECK(query.size() == 40);
  for (const auto& u : query) {
    CHECK(u.left.size() == 10);
    CHECK(u.right.size() == 10);
  }
  for (const auto& u : images_by_user(b, Split::ea_gallery)) {
    CHECK(u.left.size() == 5);
    CHECK(u.right.size() == 5);
  }

  std::map<Split, std::set<int>> users;
  bool range_ok = true, ea_live = true;
  for (const auto& s : b.samples) {
    users[s.split].insert(s.user_id);
    for (float v : s.patch) range_ok = range_ok && v >= 0.0f && v <= 1.0f;
    const bool ea = s.split == Split::ea_train || s.split == Split::ea_query || s.split == Split::ea_gallery;
    if (ea && s.spoof()) ea_live = false;
  }
  CHECK(range_ok);
  CHECK(ea_live);
  CHECK(users[Split::ea_query] == users[Split::ea_gallery]);
  auto disjoint = [](const std::set<int>& a, const std::set<int>& b) {
    for (int x : a)
      if (b.count(x)) return false;
    return true;
  };
  CHECK(disjoint(users[Split::ea_train], users[Split::ea_query]));
  for (auto s : {Split::ea_train, Split::ea_query}) {
    CHECK(disjoint(users[s], users[Split::pad_train]));
    CHECK(disjoint(users[s], users[Split::pad_test]));
  }
  CHECK(disjoint(users[Split::pad_train], users[Split::pad_test]));

  const auto pad = pad_set(b, Split::pad_train);
  int spoofs = 0;
  for (int l : pad.labels) spoofs += l;
  CHECK(spoofs == 30 * 20);
  const auto ea = ea_train_set(b);
  CHECK(ea.num_classes == 120);
}

TEST_CASE("bundle regenerates from its manifest") {
  testkit::TempDir dir("bundle");
  auto cfg = testkit::tiny_data_config(21);
  cfg.degradation = Degradation::noise;
  const auto b = build_bundle(cfg);
  save_bundle(b, dir.path());
  CHECK(bundle_exists(dir.path()));
  const auto loaded = load_bundle(dir.path());
  const auto rebuilt = build_bundle(loaded.config);
  REQUIRE(rebuilt.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    CHECK(rebuilt.samples[i].patch == b.samples[i].patch);
    CHECK(loaded.samples[i].patch == b.samples[i].patch);
    CHECK(loaded.samples[i].user_id == b.samples[i].user_id);
    CHECK(loaded.samples[i].liveness == b.samples[i].liveness);
  }
  CHECK_THROWS_AS(load_bundle(dir.path() / "nowhere"), MissingInputError);
}

TEST_CASE("degradation modes change the images") {
  auto cfg = testkit::tiny_data_config(4);
  const auto clean = build_bundle(cfg);
  cfg.degradation = Degradation::blur;
  const auto blur = build_bundle(cfg);
  cfg.degradation = Degradation::noise;
  const auto noise = build_bundle(cfg);
  int blur_diff = 0, noise_diff = 0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    blur_diff += clean.samples[i].patch != blur.samples[i].patch;
    noise_diff += clean.samples[i].patch != noise.samples[i].patch;
  }
  CHECK(noise_diff == static_cast<int>(clean.samples.size()));
  CHECK(blur_diff > 0);
}

TEST_CASE("config validation") {
  DataConfig c;
  c.validate();
  c.height = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.lens_amplitude_min = c.lens_amplitude + 0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.ea_lens_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("raw pixels are linearly separable live vs spoof") {
  const auto& b = default_bundle();
  const auto pad = pad_set(b, Split::pad_train);
  const std::size_t n = pad.samples.size(), d = b.patch_size();
  std::vector<double> x;
  x.reserve(n * d);
  for (const auto* s : pad.samples) x.insert(x.end(), s->patch.begin(), s->patch.end());
  const ad::Tensor X = ad::Tensor::matrix(n, d, std::move(x));
  std::vector<double> y(pad.labels.begin(), pad.labels.end());
  const ad::Tensor Y = ad::Tensor::vector(y);
  ad::ParamStore ps;
  ps.add("w", ad::Tensor::zeros({d}, true));
  ps.add("b", ad::Tensor::zeros({1}, true));
  for (int step = 0; step < 2000; ++step) {
    ad::Tape tape;
    auto logits = ad::add(tape, ad::matmul(tape, X, ps.get("w")), ps.get("b"));
    auto loss = ad::mean(tape, ad::sub(tape, ad::softplus(tape, logits), ad::mul(tape, Y, logits)));
    tape.backward(loss);
    ad::optimizer_step(ps, 0.01, ad::OptimizerKind::adaptive);
  }
  ad::Tape tape(ad::Tape::Mode::inference);
  auto logits = ad::add(tape, ad::matmul(tape, X, ps.get("w")), ps.get("b"));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += (logits[i] > 0) == (pad.labels[i] == 1);
  MESSAGE("linear probe train accuracy " << static_cast<double>(correct) / n);
  CHECK(static_cast<double>(correct) / n >= 0.95);
}

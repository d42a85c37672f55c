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
#include <sstream>

#include <json.hpp>

#include "eyepad/cli/experiment.hpp"
#include "eyepad/io.hpp"
#include "eyepad/models/snapshot.hpp"
#include "support/testkit.hpp"

using namespace eyepad;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "eyepad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json tiny_config(const fs::path& out) {
  return {{"data",
           {{"n_train_users", 6},
            {"n_test_users", 4},
            {"train_images_per_side", 4},
            {"query_per_side", 2},
            {"gallery_per_side", 2},
            {"pad_train_users", 3},
            {"pad_test_users", 3},
            {"pad_live_per_user", 4},
            {"pad_lens_per_user", 4},
            {"pad_print_per_user", 4},
            {"height", 12},
            {"width", 12}}},
          {"train",
           {{"strategy", "ea_only"},
            {"epochs", 1},
            {"batch_size", 8},
            {"samples_per_class", 2},
            {"preset", "small"},
            {"feature_dim", 8},
            {"lr", 1e-3},
            {"seed", 3}}},
          {"eval", {{"ks", {1, 2}}, {"runs", 2}}},
          {"output", {{"dir", out.string()}}}};
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  const auto path = dir / name;
  io::write_text(path, j.dump(2));
  return path;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("generate writes a reproducible bundle") {
  testkit::TempDir dir("cli_gen");
  const auto cfg = write_config(dir.path(), tiny_config(dir.path() / "out"));
  auto r = run({"generate", "-c", cfg.string()});
  CHECK(r.code == 0);
  const auto bin = dir.path() / "out" / "bundle" / "samples.bin";
  REQUIRE(fs::exists(bin));
  CHECK(fs::exists(dir.path() / "out" / "bundle" / "manifest.json"));
  const auto first = io::read_text(bin);
  CHECK(run({"generate", "-c", cfg.string()}).code == 0);
  CHECK(io::read_text(bin) == first);
}

TEST_CASE("config errors exit 2 and name the key") {
  testkit::TempDir dir("cli_cfg");
  auto j = tiny_config(dir.path() / "out");
  j["train"]["foo"] = 1;
  auto r = run({"generate", "-c", write_config(dir.path(), j).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("train.foo") != std::string::npos);

  j = tiny_config(dir.path() / "out");
  j["data"]["height"] = "tall";
  r = run({"generate", "-c", write_config(dir.path(), j).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("data.height") != std::string::npos);

  j = tiny_config(dir.path() / "out");
  j["train"]["strategy"] = "magic";
  r = run({"train", "-c", write_config(dir.path(), j).string()});
  CHECK(r.code == 2);

  io::write_text(dir.path() / "broken.json", "{\"data\": ");
  CHECK(run({"generate", "-c", (dir.path() / "broken.json").string()}).code == 2);
  CHECK(run({"generate", "-c", (dir.path() / "absent.json").string()}).code == 3);
  CHECK(run({"generate"}).code == 2);
  CHECK(run({"generate", "-c", write_config(dir.path(), tiny_config(dir.path() / "out")).string(), "--degradation",
             "fog"})
            .code == 2);
}

TEST_CASE("train and evaluate") {
  testkit::TempDir dir("cli_train");
  const auto out = dir.path() / "out";
  const auto cfg = write_config(dir.path(), tiny_config(out));
  CHECK(run({"train", "-c", cfg.string()}).code == 3);  // no bundle yet
  REQUIRE(run({"generate", "-c", cfg.string()}).code == 0);
  REQUIRE(run({"train", "-c", cfg.string()}).code == 0);
  const auto manifest = out / "ea_only_3.model.json";
  REQUIRE(fs::exists(manifest));
  const auto blob = io::read_text(out / "ea_only_3.model.bin");
  const auto snap = models::load_snapshot(manifest);
  CHECK(snap.model.features(ad::Tensor::matrix(1, 144, std::vector<double>(144, 0.5))).size() == 1);
  CHECK(lines(io::read_text(out / "trainlog.csv")) == 1 + 6);
  REQUIRE(run({"train", "-c", cfg.string()}).code == 0);
  CHECK(io::read_text(out / "ea_only_3.model.bin") == blob);

  REQUIRE(run({"evaluate", "-c", cfg.string(), "-s", manifest.string()}).code == 0);
  const auto report = io::read_text(out / "report.json");
  CHECK(cli::load_config(cfg).output_dir == out);
  CHECK(eval::validate_report_json(json::parse(report)).empty());
  CHECK(lines(io::read_text(out / "table.csv")) == 3);
  const auto record = json::parse(io::read_text(out / "record.json"));
  CHECK(record.contains("config_hash"));
  CHECK(record["seeds"]["master"] == 3);
  REQUIRE(run({"evaluate", "-c", cfg.string(), "-s", manifest.string()}).code == 0);
  CHECK(io::read_text(out / "report.json") == report);

  // A bundle with another patch size cannot be scored by this snapshot.
  auto other = tiny_config(dir.path() / "other");
  other["data"]["height"] = 16;
  other["data"]["width"] = 16;
  const auto other_cfg = write_config(dir.path(), other, "other.json");
  REQUIRE(run({"generate", "-c", other_cfg.string()}).code == 0);
  CHECK(run({"evaluate", "-c", other_cfg.string(), "-s", manifest.string()}).code == 4);
  CHECK(run({"evaluate", "-c", cfg.string(), "-s", (out / "nothing").string()}).code == 3);
}

TEST_CASE("master seed override") {
  testkit::TempDir dir("cli_seed");
  auto cfg = cli::parse_config(tiny_config(dir.path()));
  const auto data_seed = cfg.resolved_data_seed();
  cfg.set_master_seed(99);
  CHECK(cfg.master_seed() == 99);
  CHECK(cfg.resolved_data_seed() != data_seed);
  CHECK(cli::config_hash(cfg) == cli::config_hash(cli::parse_config(cli::config_to_json(cfg))));
}

TEST_CASE("ablation and comparison tables") {
  testkit::TempDir dir("cli_cmp");
  const auto out = dir.path() / "out";
  const auto cfg = write_config(dir.path(), tiny_config(out));
  REQUIRE(run({"generate", "-c", cfg.string()}).code == 0);
  REQUIRE(run({"ablate-lambda1", "-c", cfg.string(), "--values", "0.5"}).code == 0);
  CHECK(fs::exists(out / "ablation_lambda1_0.5_3.json"));
  CHECK(lines(io::read_text(out / "ablation.csv")) == 2);
  REQUIRE(run({"ablate-lambda1", "-c", cfg.string(), "--values", "0.5,2"}).code == 0);
  CHECK(lines(io::read_text(out / "ablation.csv")) == 3);
  CHECK(run({"ablate-lambda1", "-c", cfg.string(), "--values", "-1"}).code == 2);

  REQUIRE(run({"compare", "-c", cfg.string()}).code == 0);
  const auto csv = io::read_text(out / "compare.csv");
  CHECK(lines(csv) == 1 + 6);
  for (auto s : train::kAllStrategies) {
    CHECK(csv.find(std::string(train::to_string(s))) != std::string::npos);
    CHECK(fs::exists(out / ("report_" + std::string(train::to_string(s)) + "_3.json")));
  }
  CHECK(fs::exists(out / "compare.md"));
}

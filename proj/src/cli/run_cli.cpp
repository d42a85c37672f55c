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

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eyepad/cli/experiment.hpp"
#include "eyepad/error.hpp"

namespace eyepad::cli {
namespace {

ExperimentConfig load_with_overrides(const std::string& path, const std::string& degradation) {
  auto cfg = load_config(path);
  if (!degradation.empty()) {
    cfg.data.degradation = data::degradation_from_string(degradation);
    cfg.train.degradation = cfg.data.degradation;
  }
  if (const char* env = std::getenv("EYEPAD_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("EYEPAD_SEED must be a non-negative integer");
    cfg.set_master_seed(seed);
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint eye authentication and presentation attack detection experiments"};
  app.require_subcommand(1);
  std::string config_path, degradation, snapshot, values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--degradation", degradation, "override data.degradation")
        ->check(CLI::IsMember({"clean", "blur", "noise"}));
  };
  auto* generate = app.add_subcommand("generate", "write the synthetic dataset bundle");
  auto* train = app.add_subcommand("train", "train the configured strategy");
  auto* evaluate = app.add_subcommand("evaluate", "run the evaluation protocols on a snapshot");
  auto* ablate = app.add_subcommand("ablate-lambda1", "EyePAD lambda1 sweep");
  auto* compare = app.add_subcommand("compare", "train and evaluate all six strategies");
  for (auto* sub : {generate, train, evaluate, ablate, compare}) add_common(sub);
  evaluate->add_option("-s,--snapshot", snapshot, "model manifest or stem")->required();
  ablate->add_option("--values", values, "comma-separated lambda1 values (default: config grid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load_with_overrides(config_path, degradation);
    if (generate->parsed()) {
      cmd_generate(cfg, out);
    } else if (train->parsed()) {
      cmd_train(cfg, out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(cfg, snapshot, out);
    } else if (ablate->parsed()) {
      std::vector<double> grid = cfg.lambda1_grid;
      if (!values.empty()) {
        grid.clear();
        std::stringstream ss(values);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
          } catch (const std::exception&) {
            throw ConfigError("--values: '" + item + "' is not a number");
          }
        }
      }
      cmd_ablate_lambda1(cfg, grid, out);
    } else if (compare->parsed()) {
      cmd_compare(cfg, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace eyepad::cli

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
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyepad/data/synth.hpp"
#include "eyepad/eval/report.hpp"
#include "eyepad/train/trainers.hpp"

namespace eyepad::cli {

inline constexpr double kLambda1Grid[] = {0.1, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0};

/// One experiment: sections data, train, eval, output of a JSON file.
struct ExperimentConfig {
  data::DataConfig data;
  std::optional<std::uint64_t> data_seed;  // default: derived from the master seed
  train::TrainConfig train;                // train.seed is the master seed
  std::vector<std::uint64_t> seeds;        // compare / ablation seeds; default {train.seed}
  std::vector<double> lambda1_grid{std::begin(kLambda1Grid), std::end(kLambda1Grid)};
  eval::EvalSettings eval;
  std::optional<std::uint64_t> eval_seed;  // default: derived from the master seed
  std::filesystem::path output_dir = "out";
  std::filesystem::path bundle_dir;  // default: <output_dir>/bundle

  std::uint64_t master_seed() const { return train.seed; }
  std::uint64_t resolved_data_seed() const;
  std::uint64_t resolved_eval_seed() const;
  std::vector<std::uint64_t> resolved_seeds() const;
  std::filesystem::path resolved_bundle_dir() const;
  // Sets the master seed and every seed derived from it.
  void set_master_seed(std::uint64_t seed);
};

// Relative paths resolve against `base_dir`. Unknown keys and wrong types
// raise ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Short hex digest of the canonical config JSON.
std::string config_hash(const ExperimentConfig& cfg);

data::DatasetBundle cmd_generate(const ExperimentConfig& cfg, std::ostream& log);

struct TrainArtifacts {
  std::filesystem::path snapshot;          // final model manifest
  std::optional<std::filesystem::path> teacher;  // EyePAD teacher manifest
  std::filesystem::path trainlog;
};
TrainArtifacts cmd_train(const ExperimentConfig& cfg, std::ostream& log);

eval::MetricsReport cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& snapshot, std::ostream& log);

struct AblationRow {
  double lambda1 = 0;
  double tar_1e3 = 0;
  double tdr = 0;
};
std::vector<AblationRow> cmd_ablate_lambda1(const ExperimentConfig& cfg, const std::vector<double>& values,
                                            std::ostream& log);

struct CompareRow {
  train::Strategy strategy;
  // Mean over seeds; empty for metrics a single-task model cannot report.
  std::optional<std::vector<eval::RunValues>> per_k;  // aligned with eval.ks
  std::optional<eval::RunValues> pad;  // tdr, apcer, bpcer, hter
  std::vector<double> ofrr_by_seed;  // K = max(ks)
};
std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::ostream& log);

std::string compare_table_csv(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows);
std::string compare_table_markdown(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows);

// 0 success, 2 config error, 3 missing input, 4 incompatible artifacts,
// 1 anything else.
int exit_code_for(const std::exception& e);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eyepad::cli

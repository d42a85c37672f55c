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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyepad/data/synth.hpp"
#include "eyepad/eval/protocols.hpp"
#include "eyepad/models/model.hpp"

namespace eyepad::eval {

struct EvalSettings {
  std::vector<int> ks{1, 2, 5};
  std::vector<double> far_targets{std::begin(kFarTargets), std::end(kFarTargets)};
  int runs = 10;
  double fdr = 0.002;
  double sar = 0.05;
  bool eye_to_eye = true;
  bool verification = true;
  bool pad = true;

  void validate() const;
};

struct VerificationReport {
  int K = 0;
  RunAverage runs;
  RocCurve first_run_roc;
};

struct MetricsReport {
  std::string strategy;
  std::uint64_t eval_seed = 0;
  EvalSettings settings;
  std::vector<VerificationReport> verification;
  std::optional<PadMetrics> pad;
  std::optional<EyeToEyeResult> eye_to_eye;

  const VerificationReport* for_k(int K) const;
};

// Verification and OFRR for every K, PAD metrics on the PAD test split and
// eye-to-eye verification on the query right eyes. Spoof rejection in
// OFRR needs the PAD metrics; without them t_pad is +inf.
MetricsReport evaluate_model(const models::EmbeddingModel& model, const data::DatasetBundle& bundle,
                             const EvalSettings& settings, std::uint64_t seed, const std::string& strategy = "");

nlohmann::json report_to_json(const MetricsReport& report);
// Empty when `j` has the MetricsReport layout, otherwise one message per problem.
std::vector<std::string> validate_report_json(const nlohmann::json& j);

// One row per K: K, ofrr, tar_<far>..., tdr_fdr_<fdr>, apcer, bpcer, hter.
std::string report_table_csv(const MetricsReport& report);
// curve,K,threshold,tpr,fpr for the first verification run of each K, the
// PAD test curve and the eye-to-eye curve.
std::string report_roc_csv(const MetricsReport& report);

// JSON number, or null for +-inf / NaN.
nlohmann::json json_number(double v);

}  // namespace eyepad::eval

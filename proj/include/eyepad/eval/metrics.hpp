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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eyepad::eval {

// A sample is accepted (matched / flagged) when score >= threshold.
struct RocPoint {
  double threshold;
  double tpr;  // TAR or TDR
  double fpr;  // FAR or FDR
};

struct RocCurve {
  // Ascending unique scores followed by +inf, so the first point is (1,1)
  // and the last is (0,0).
  std::vector<RocPoint> points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

RocCurve build_roc(std::span<const double> positive_scores, std::span<const double> negative_scores);

struct OperatingPoint {
  std::size_t index;  // into RocCurve::points
  double threshold;
  double tpr;
  double fpr;
};

// Most permissive threshold whose false-positive rate does not exceed the
// target. Always exists because the +inf point has fpr 0.
OperatingPoint at_fpr(const RocCurve& roc, double target);

double tar_at_far(std::span<const double> genuine, std::span<const double> impostor, double far);

// labels: 1 = spoof, 0 = live; scores are spoof probabilities.
double tdr_at_fdr(std::span<const double> scores, std::span<const int> labels, double fdr = 0.002);
OperatingPoint pad_operating_point(std::span<const double> scores, std::span<const int> labels, double fdr = 0.002);

struct PadErrorRates {
  double apcer;
  double bpcer;
  double hter;
};

PadErrorRates apcer_bpcer_hter(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// k-th smallest spoof score with k = floor(sar * n): at most a fraction
// `sar` of the spoofs score at or below it (barring ties).
double sar_threshold(std::span<const double> spoof_scores, double sar = 0.05);

// "1e-3" for exact powers of ten, %g otherwise.
std::string rate_label(double rate);

// Linear interpolation between the two ROC points bracketing FAR = FRR.
double equal_error_rate(const RocCurve& roc);

}  // namespace eyepad::eval

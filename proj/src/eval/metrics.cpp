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

#include "eyepad/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "eyepad/error.hpp"

namespace eyepad::eval {
namespace {

void check_finite(std::span<const double> scores, const char* what) {
  for (double s : scores)
    if (!std::isfinite(s)) throw PreconditionError(std::string(what) + " contains a non-finite score");
}

std::pair<std::vector<double>, std::vector<double>> split_by_label(std::span<const double> scores,
                                                                   std::span<const int> labels) {
  if (scores.size() != labels.size()) throw PreconditionError("scores and labels differ in length");
  std::vector<double> spoof, live;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      spoof.push_back(scores[i]);
    } else if (labels[i] == 0) {
      live.push_back(scores[i]);
    } else {
      throw PreconditionError("PAD labels must be 0 (live) or 1 (spoof)");
    }
  }
  if (live.empty()) throw PreconditionError("PAD metrics need at least one live sample");
  if (spoof.empty()) throw PreconditionError("PAD metrics need at least one spoof sample");
  return {std::move(spoof), std::move(live)};
}

}  // namespace

RocCurve build_roc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty()) throw PreconditionError("ROC needs at least one positive score");
  if (negative_scores.empty()) throw PreconditionError("ROC needs at least one negative score");
  check_finite(positive_scores, "positive set");
  check_finite(negative_scores, "negative set");

  std::vector<double> pos(positive_scores.begin(), positive_scores.end());
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size() + 1);
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  RocCurve roc;
  roc.positives = pos.size();
  roc.negatives = neg.size();
  roc.points.reserve(thresholds.size());
  const auto np = static_cast<double>(pos.size());
  const auto nn = static_cast<double>(neg.size());
  for (double t : thresholds) {
    const auto p = pos.end() - std::lower_bound(pos.begin(), pos.end(), t);
    const auto n = neg.end() - std::lower_bound(neg.begin(), neg.end(), t);
    roc.points.push_back({t, static_cast<double>(p) / np, static_cast<double>(n) / nn});
  }
  return roc;
}

OperatingPoint at_fpr(const RocCurve& roc, double target) {
  if (roc.points.empty()) throw PreconditionError("empty ROC curve");
  if (!(target >= 0 && target <= 1)) throw PreconditionError("false-positive target must lie in [0,1]");
  // fpr is non-increasing along the curve.
  for (std::size_t i = 0; i < roc.points.size(); ++i) {
    const auto& p = roc.points[i];
    if (p.fpr <= target) return {i, p.threshold, p.tpr, p.fpr};
  }
  const auto& last = roc.points.back();
  return {roc.points.size() - 1, last.threshold, last.tpr, last.fpr};
}

double tar_at_far(std::span<const double> genuine, std::span<const double> impostor, double far) {
  return at_fpr(build_roc(genuine, impostor), far).tpr;
}

OperatingPoint pad_operating_point(std::span<const double> scores, std::span<const int> labels, double fdr) {
  auto [spoof, live] = split_by_label(scores, labels);
  return at_fpr(build_roc(spoof, live), fdr);
}

double tdr_at_fdr(std::span<const double> scores, std::span<const int> labels, double fdr) {
  return pad_operating_point(scores, labels, fdr).tpr;
}

PadErrorRates apcer_bpcer_hter(std::span<const double> scores, std::span<const int> labels, double threshold) {
  auto [spoof, live] = split_by_label(scores, labels);
  const auto accepted = std::count_if(spoof.begin(), spoof.end(), [&](double s) { return s <= threshold; });
  const auto rejected = std::count_if(live.begin(), live.end(), [&](double s) { return s > threshold; });
  PadErrorRates r;
  r.apcer = static_cast<double>(accepted) / static_cast<double>(spoof.size());
  r.bpcer = static_cast<double>(rejected) / static_cast<double>(live.size());
  r.hter = (r.apcer + r.bpcer) / 2;
  return r;
}

double sar_threshold(std::span<const double> spoof_scores, double sar) {
  if (!(sar > 0 && sar < 1)) throw PreconditionError("SAR target must lie in (0,1)");
  check_finite(spoof_scores, "spoof set");
  const auto k = static_cast<std::size_t>(std::floor(sar * static_cast<double>(spoof_scores.size()) + 1e-9));
  if (k < 1) {
    throw PreconditionError("SAR threshold needs at least " + std::to_string(static_cast<int>(std::ceil(1 / sar))) +
                            " spoof scores, got " + std::to_string(spoof_scores.size()));
  }
  std::vector<double> sorted(spoof_scores.begin(), spoof_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

std::string rate_label(double rate) {
  if (rate > 0) {
    const double e = std::round(std::log10(rate));
    if (std::pow(10.0, e) == rate) return "1e" + std::to_string(static_cast<int>(e));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rate);
  return buf;
}

double equal_error_rate(const RocCurve& roc) {
  if (roc.points.size() < 2) throw PreconditionError("EER needs at least two ROC points");
  // d = FAR - FRR falls from +1 at the first point to -1 at +inf.
  for (std::size_t i = 0; i + 1 < roc.points.size(); ++i) {
    const auto& a = roc.points[i];
    const auto& b = roc.points[i + 1];
    const double da = a.fpr - (1 - a.tpr);
    const double db = b.fpr - (1 - b.tpr);
    if (da == 0) return a.fpr;
    if (da > 0 && db <= 0) {
      const double w = da / (da - db);
      return a.fpr + w * (b.fpr - a.fpr);
    }
  }
  return roc.points.back().fpr;
}

}  // namespace eyepad::eval

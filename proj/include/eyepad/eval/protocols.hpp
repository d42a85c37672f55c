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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eyepad/data/synth.hpp"
#include "eyepad/eval/metrics.hpp"
#include "eyepad/models/model.hpp"

namespace eyepad::eval {

using Feature = std::vector<double>;

// Model outputs for every image of one user in an EA split.
struct EncodedUser {
  int user_id = 0;
  std::vector<Feature> left, right;
  std::vector<double> left_spoof, right_spoof;  // spoof probabilities
};
using EncodedSet = std::vector<EncodedUser>;

struct Encoded {
  std::vector<Feature> features;
  std::vector<double> spoof;
};

Encoded encode_samples(const models::EmbeddingModel& model, const std::vector<const data::EyeSample*>& samples);
EncodedSet encode_users(const models::EmbeddingModel& model, const std::vector<data::UserEyeImages>& users);

double cosine_similarity(const Feature& a, const Feature& b);

// Dense |Q| x |G| similarity matrix keyed by user ids.
class SimilarityDict {
 public:
  SimilarityDict(std::vector<int> query_users, std::vector<int> gallery_users);
  double at(int query_user, int gallery_user) const;
  void set(int query_user, int gallery_user, double s);
  bool contains(int query_user, int gallery_user) const;
  const std::vector<int>& query_users() const { return query_users_; }
  const std::vector<int>& gallery_users() const { return gallery_users_; }

 private:
  std::size_t index(int query_user, int gallery_user) const;
  std::vector<int> query_users_, gallery_users_;
  std::map<int, std::size_t> q_index_, g_index_;
  std::vector<double> values_;
  std::vector<char> filled_;
};

inline constexpr double kFarTargets[] = {1e-4, 1e-3, 1e-2};
inline constexpr double kAuthFar = 1e-3;

struct UserToUserResult {
  SimilarityDict S{{}, {}};
  std::map<int, std::size_t> query_left;   // user -> selected left image
  std::map<int, std::size_t> query_right;  // user -> selected right image
  std::vector<double> genuine, impostor;
  RocCurve roc;
  double t_auth = 0;
  std::map<double, double> tar_at_far;
};

// One run of user-to-user verification; the query pair and the K gallery
// pairs are drawn once per user.
UserToUserResult user_to_user(const EncodedSet& query, const EncodedSet& gallery, int K, std::uint64_t seed,
                              const std::vector<double>& far_targets = {std::begin(kFarTargets),
                                                                        std::end(kFarTargets)});

struct OfrrResult {
  double ofrr = 0;
  int x_spoof = 0;
  int x_auth = 0;
  int num_query = 0;
};

OfrrResult compute_ofrr(const EncodedSet& query, const SimilarityDict& S, const std::map<int, std::size_t>& query_left,
                        const std::map<int, std::size_t>& query_right, double t_auth, double t_pad);

struct PadScores {
  std::vector<double> scores;
  std::vector<int> labels;
};
PadScores pad_scores(const models::EmbeddingModel& model, const data::PadSet& set);

struct PadMetrics {
  double tdr_at_fdr = 0;
  double apcer = 0, bpcer = 0, hter = 0;
  double t_pad = 0;
  RocCurve roc;
};
PadMetrics pad_metrics(const PadScores& scores, double fdr = 0.002, double sar = 0.05);

// Named scalar metrics of one protocol run.
using RunValues = std::map<std::string, double>;

struct RunAverage {
  std::vector<RunValues> runs;
  RunValues mean;
};

// Calls `protocol` with a fresh seed per run and averages every key.
RunAverage repeat_and_average(const std::function<RunValues(std::uint64_t seed)>& protocol, int runs,
                              std::uint64_t master_seed);

// Verification and OFRR repeated `runs` times for one K.
RunAverage verification_runs(const EncodedSet& query, const EncodedSet& gallery, int K, double t_pad, int runs,
                             std::uint64_t master_seed,
                             const std::vector<double>& far_targets = {std::begin(kFarTargets), std::end(kFarTargets)});

struct EyeToEyeResult {
  double tar_at_1e3 = 0;
  double eer = 0;
  RocCurve roc;
};

// All pairs among single-eye features; genuine = same user.
EyeToEyeResult eye_to_eye_eval(const std::vector<Feature>& features, const std::vector<int>& user_ids);
EyeToEyeResult eye_to_eye_eval(const models::EmbeddingModel& model, const std::vector<data::UserEyeImages>& users);

}  // namespace eyepad::eval

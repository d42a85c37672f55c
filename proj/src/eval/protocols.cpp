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

#include "eyepad/eval/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::eval {
namespace {

constexpr std::size_t kEncodeBatch = 256;

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// K distinct indices out of n (partial Fisher-Yates).
std::vector<std::size_t> pick_k(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + pick(rng, n - i)]);
  idx.resize(k);
  return idx;
}

Feature mean_feature(const std::vector<Feature>& features, const std::vector<std::size_t>& idx) {
  Feature out(features[idx.front()].size(), 0.0);
  for (auto i : idx)
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += features[i][d];
  for (double& v : out) v /= static_cast<double>(idx.size());
  return out;
}

}  // namespace

Encoded encode_samples(const models::EmbeddingModel& model, const std::vector<const data::EyeSample*>& samples) {
  Encoded out;
  const std::size_t patch = model.spec().input_size();
  for (std::size_t start = 0; start < samples.size(); start += kEncodeBatch) {
    const std::size_t end = std::min(samples.size(), start + kEncodeBatch);
    std::vector<const std::vector<float>*> patches;
    for (std::size_t i = start; i < end; ++i) patches.push_back(&samples[i]->patch);
    const auto batch = models::make_batch(patches, patch);
    ad::Tape tape(ad::Tape::Mode::inference);
    const auto output = model.forward(tape, batch);
    const std::size_t d = output.features.shape()[1];
    const auto f = output.features.values();
    for (std::size_t i = 0; i < end - start; ++i) {
      out.features.emplace_back(f.begin() + static_cast<std::ptrdiff_t>(i * d),
                                f.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
      out.spoof.push_back(models::logistic(output.logits[i]));
    }
  }
  return out;
}

EncodedSet encode_users(const models::EmbeddingModel& model, const std::vector<data::UserEyeImages>& users) {
  EncodedSet out;
  for (const auto& u : users) {
    auto left = encode_samples(model, u.left);
    auto right = encode_samples(model, u.right);
    out.push_back({u.user_id, std::move(left.features), std::move(right.features), std::move(left.spoof),
                   std::move(right.spoof)});
  }
  return out;
}

double cosine_similarity(const Feature& a, const Feature& b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: feature sizes differ");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityDict::SimilarityDict(std::vector<int> query_users, std::vector<int> gallery_users)
    : query_users_(std::move(query_users)), gallery_users_(std::move(gallery_users)) {
  for (std::size_t i = 0; i < query_users_.size(); ++i)
    if (!q_index_.emplace(query_users_[i], i).second) throw PreconditionError("duplicate query user");
  for (std::size_t i = 0; i < gallery_users_.size(); ++i)
    if (!g_index_.emplace(gallery_users_[i], i).second) throw PreconditionError("duplicate gallery user");
  values_.assign(query_users_.size() * gallery_users_.size(), 0.0);
  filled_.assign(values_.size(), 0);
}

std::size_t SimilarityDict::index(int query_user, int gallery_user) const {
  auto q = q_index_.find(query_user);
  auto g = g_index_.find(gallery_user);
  if (q == q_index_.end() || g == g_index_.end()) {
    throw PreconditionError("similarity dictionary has no entry for (" + std::to_string(query_user) + ", " +
                            std::to_string(gallery_user) + ")");
  }
  return q->second * gallery_users_.size() + g->second;
}

double SimilarityDict::at(int query_user, int gallery_user) const {
  const auto i = index(query_user, gallery_user);
  if (!filled_[i]) {
    throw PreconditionError("similarity dictionary has no entry for (" + std::to_string(query_user) + ", " +
                            std::to_string(gallery_user) + ")");
  }
  return values_[i];
}

void SimilarityDict::set(int query_user, int gallery_user, double s) {
  const auto i = index(query_user, gallery_user);
  values_[i] = s;
  filled_[i] = 1;
}

bool SimilarityDict::contains(int query_user, int gallery_user) const {
  auto q = q_index_.find(query_user);
  auto g = g_index_.find(gallery_user);
  return q != q_index_.end() && g != g_index_.end() && filled_[q->second * gallery_users_.size() + g->second];
}

UserToUserResult user_to_user(const EncodedSet& query, const EncodedSet& gallery, int K, std::uint64_t seed,
                              const std::vector<double>& far_targets) {
  if (K < 1) throw PreconditionError("K must be >= 1");
  if (query.empty() || gallery.empty()) throw PreconditionError("user-to-user verification needs query and gallery users");
  const auto k = static_cast<std::size_t>(K);
  for (const auto& g : gallery) {
    if (g.left.size() < k || g.right.size() < k) {
      throw PreconditionError("gallery user " + std::to_string(g.user_id) + " has fewer than " + std::to_string(K) +
                              " images per side");
    }
  }
  for (const auto& q : query)
    if (q.left.empty() || q.right.empty())
      throw PreconditionError("query user " + std::to_string(q.user_id) + " lacks a left or right image");

  std::vector<int> q_ids, g_ids;
  for (const auto& q : query) q_ids.push_back(q.user_id);
  for (const auto& g : gallery) g_ids.push_back(g.user_id);
  UserToUserResult r;
  r.S = SimilarityDict(q_ids, g_ids);

  std::mt19937_64 rng(seed);
  for (const auto& q : query) {
    r.query_left[q.user_id] = pick(rng, q.left.size());
    r.query_right[q.user_id] = pick(rng, q.right.size());
  }
  std::vector<Feature> g_left, g_right;
  for (const auto& g : gallery) {
    g_left.push_back(mean_feature(g.left, pick_k(rng, g.left.size(), k)));
    g_right.push_back(mean_feature(g.right, pick_k(rng, g.right.size(), k)));
  }

  for (const auto& q : query) {
    const Feature& fl = q.left[r.query_left[q.user_id]];
    const Feature& fr = q.right[r.query_right[q.user_id]];
    for (std::size_t j = 0; j < gallery.size(); ++j) {
      const double s = 0.5 * (cosine_similarity(fl, g_left[j]) + cosine_similarity(fr, g_right[j]));
      r.S.set(q.user_id, gallery[j].user_id, s);
      (q.user_id == gallery[j].user_id ? r.genuine : r.impostor).push_back(s);
    }
  }
  if (r.genuine.empty()) throw PreconditionError("no query user appears in the gallery");
  if (r.impostor.empty()) throw PreconditionError("user-to-user verification needs at least two users");

  r.roc = build_roc(r.genuine, r.impostor);
  r.t_auth = at_fpr(r.roc, kAuthFar).threshold;
  for (double far : far_targets) r.tar_at_far[far] = at_fpr(r.roc, far).tpr;
  return r;
}

OfrrResult compute_ofrr(const EncodedSet& query, const SimilarityDict& S, const std::map<int, std::size_t>& query_left,
                        const std::map<int, std::size_t>& query_right, double t_auth, double t_pad) {
  if (query.empty()) throw PreconditionError("OFRR needs at least one query user");
  OfrrResult r;
  r.num_query = static_cast<int>(query.size());
  for (const auto& q : query) {
    auto l = query_left.find(q.user_id);
    auto rr = query_right.find(q.user_id);
    if (l == query_left.end() || rr == query_right.end()) {
      throw PreconditionError("no stored query images for user " + std::to_string(q.user_id));
    }
    const double o_left = q.left_spoof.at(l->second);
    const double o_right = q.right_spoof.at(rr->second);
    if (o_left > t_pad || o_right > t_pad) {
      ++r.x_spoof;
    } else if (S.at(q.user_id, q.user_id) < t_auth) {
      ++r.x_auth;
    }
  }
  r.ofrr = static_cast<double>(r.x_spoof + r.x_auth) / r.num_query;
  return r;
}

PadScores pad_scores(const models::EmbeddingModel& model, const data::PadSet& set) {
  if (set.samples.empty()) throw PreconditionError("PAD scoring needs at least one sample");
  return {encode_samples(model, set.samples).spoof, set.labels};
}

PadMetrics pad_metrics(const PadScores& s, double fdr, double sar) {
  PadMetrics m;
  const auto op = pad_operating_point(s.scores, s.labels, fdr);
  m.tdr_at_fdr = op.tpr;
  const auto rates = apcer_bpcer_hter(s.scores, s.labels);
  m.apcer = rates.apcer;
  m.bpcer = rates.bpcer;
  m.hter = rates.hter;
  std::vector<double> spoof, live;
  for (std::size_t i = 0; i < s.scores.size(); ++i) (s.labels[i] == 1 ? spoof : live).push_back(s.scores[i]);
  m.t_pad = sar_threshold(spoof, sar);
  m.roc = build_roc(spoof, live);
  return m;
}

RunAverage repeat_and_average(const std::function<RunValues(std::uint64_t seed)>& protocol, int runs,
                              std::uint64_t master_seed) {
  if (runs < 1) throw PreconditionError("runs must be >= 1");
  RunAverage out;
  for (int r = 0; r < runs; ++r) out.runs.push_back(protocol(io::derive_seed(master_seed, "protocol", r)));
  for (const auto& run : out.runs)
    for (const auto& [key, value] : run) out.mean[key] += value;
  for (auto& [key, value] : out.mean) value /= runs;
  return out;
}

RunAverage verification_runs(const EncodedSet& query, const EncodedSet& gallery, int K, double t_pad, int runs,
                             std::uint64_t master_seed, const std::vector<double>& far_targets) {
  return repeat_and_average(
      [&](std::uint64_t seed) {
        const auto u2u = user_to_user(query, gallery, K, seed, far_targets);
        const auto ofrr = compute_ofrr(query, u2u.S, u2u.query_left, u2u.query_right, u2u.t_auth, t_pad);
        RunValues v;
        for (const auto& [far, tar] : u2u.tar_at_far) v["tar_" + rate_label(far)] = tar;
        v["t_auth"] = u2u.t_auth;
        v["ofrr"] = ofrr.ofrr;
        v["x_spoof"] = ofrr.x_spoof;
        v["x_auth"] = ofrr.x_auth;
        return v;
      },
      runs, master_seed);
}

EyeToEyeResult eye_to_eye_eval(const std::vector<Feature>& features, const std::vector<int>& user_ids) {
  if (features.size() != user_ids.size()) throw PreconditionError("features and user ids differ in length");
  std::map<int, int> per_user;
  for (int u : user_ids) ++per_user[u];
  if (per_user.size() < 2) throw PreconditionError("eye-to-eye verification needs at least two users");
  for (const auto& [u, n] : per_user)
    if (n < 2) throw PreconditionError("eye-to-eye verification needs two images of user " + std::to_string(u));
  std::vector<double> genuine, impostor;
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = i + 1; j < features.size(); ++j)
      (user_ids[i] == user_ids[j] ? genuine : impostor).push_back(cosine_similarity(features[i], features[j]));
  EyeToEyeResult r;
  r.roc = build_roc(genuine, impostor);
  r.tar_at_1e3 = at_fpr(r.roc, 1e-3).tpr;
  r.eer = equal_error_rate(r.roc);
  return r;
}

EyeToEyeResult eye_to_eye_eval(const models::EmbeddingModel& model, const std::vector<data::UserEyeImages>& users) {
  std::vector<const data::EyeSample*> samples;
  std::vector<int> ids;
  for (const auto& u : users)
    for (const auto* s : u.right) {
      samples.push_back(s);
      ids.push_back(u.user_id);
    }
  return eye_to_eye_eval(encode_samples(model, samples).features, ids);
}

}  // namespace eyepad::eval

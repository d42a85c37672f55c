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

#include "eyepad/losses/losses.hpp"

#include <limits>
#include <map>
#include <string>

#include "eyepad/error.hpp"

namespace eyepad::losses {
namespace {

void require_frozen(const EmbeddingModel& teacher, const char* who) {
  if (!teacher.frozen()) throw PreconditionError(std::string(who) + ": teacher model must be frozen");
}

void require_labels(const Tensor& t, std::span<const int> labels, const char* who) {
  if (t.rows() != labels.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(t.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
}

Tensor teacher_features(const EmbeddingModel& teacher, const Tensor& images) {
  Tape inference(Tape::Mode::inference);
  return teacher.forward_features(inference, images);
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("loss weights: alpha must be > 0");
  if (lambda1 < 0 || lambda2 < 0 || lambda_auth < 0 || lambda_pad < 0) {
    throw ConfigError("loss weights: lambdas must be >= 0");
  }
}

TripletIndices mine_triplets(const Tensor& features, std::span<const int> labels) {
  if (features.rank() != 2) throw ShapeError("mine_triplets: features must be [N,d], got " + ad::shape_string(features.shape()));
  require_labels(features, labels, "mine_triplets");
  const std::size_t n = features.shape()[0];
  const std::size_t d = features.shape()[1];
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) throw PreconditionError("mine_triplets: batch holds a single class");
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw PreconditionError("mine_triplets: class " + std::to_string(label) + " has a single sample");
    }
  }
  auto f = features.values();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = f[i * d + k] - f[j * d + k];
        acc += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = acc;
    }
  TripletIndices out;
  out.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t pos = n;
    std::size_t neg = n;
    double best_pos = -1.0;
    double best_neg = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double dai = dist[a * n + i];
      if (labels[i] == labels[a]) {
        if (i != a && dai > best_pos) {
          best_pos = dai;
          pos = i;
        }
      } else if (dai < best_neg) {
        best_neg = dai;
        neg = i;
      }
    }
    out.push_back({a, pos, neg});
  }
  return out;
}

Tensor triplet_loss(Tape& tape, const Tensor& features, const TripletIndices& triplets, double alpha) {
  if (triplets.empty()) throw PreconditionError("triplet_loss: no triplets");
  std::vector<std::size_t> a, p, n;
  for (const auto& t : triplets) {
    a.push_back(t.anchor);
    p.push_back(t.positive);
    n.push_back(t.negative);
  }
  Tensor fa = ad::gather_rows(tape, features, a);
  Tensor fp = ad::gather_rows(tape, features, p);
  Tensor fn = ad::gather_rows(tape, features, n);
  Tensor gap = ad::sub(tape, ad::sq_dist_rows(tape, fp, fa), ad::sq_dist_rows(tape, fn, fa));
  return ad::mean(tape, ad::hinge(tape, ad::add_scalar(tape, gap, alpha)));
}

Tensor distill_loss(Tape& tape, const Tensor& f_s, const Tensor& f_t) {
  Tensor cos = ad::cosine_rows(tape, f_s, f_t);
  return ad::add_scalar(tape, ad::scale(tape, ad::mean(tape, cos), -1.0), 1.0);
}

Tensor pad_loss(Tape& tape, const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 1) throw ShapeError("pad_loss: logits must be 1-D, got " + ad::shape_string(logits.shape()));
  require_labels(logits, labels, "pad_loss");
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw PreconditionError("pad_loss: labels must be 0 or 1");
    y[i] = labels[i];
  }
  // softplus(o) - y*o == -[y log p + (1-y) log(1-p)] with p = logistic(o)
  Tensor targets = Tensor::vector(std::move(y));
  return ad::mean(tape, ad::sub(tape, ad::softplus(tape, logits), ad::mul(tape, targets, logits)));
}

Tensor id_loss(Tape& tape, const Tensor& features, std::span<const int> labels, double alpha) {
  return triplet_loss(tape, features, mine_triplets(features, labels), alpha);
}

LossTerms with_distillation(Tape& tape, const Tensor& task, const Tensor& f_s, const Tensor& f_t, double lambda) {
  Tensor dis = distill_loss(tape, f_s, f_t);
  return {ad::add(tape, task, ad::scale(tape, dis, lambda)), task, dis};
}

LossTerms with_two_teachers(Tape& tape, const Tensor& task, const Tensor& f, const Tensor& f_auth,
                            const Tensor& f_pad, const LossWeights& w) {
  Tensor dis_auth = distill_loss(tape, f_auth, f);
  Tensor dis_pad = distill_loss(tape, f_pad, f);
  Tensor total = ad::add(tape, ad::add(tape, task, ad::scale(tape, dis_auth, w.lambda_auth)),
                         ad::scale(tape, dis_pad, w.lambda_pad));
  return {total, task, ad::add(tape, dis_auth, dis_pad)};
}

LossTerms ea_task(Tape& tape, const EaBatch& batch, const EmbeddingModel& model, const LossWeights& w) {
  Tensor task = id_loss(tape, model.forward_features(tape, batch.images), batch.labels, w.alpha);
  return {task, task, Tensor::scalar(0.0)};
}

LossTerms pad_task(Tape& tape, const PadBatch& batch, const EmbeddingModel& model) {
  Tensor task = pad_loss(tape, model.forward_pad_logit(tape, batch.images), batch.labels);
  return {task, task, Tensor::scalar(0.0)};
}

LossTerms eyepad_multi(Tape& tape, const PadBatch& batch, const EmbeddingModel& student,
                       const EmbeddingModel& teacher, const LossWeights& w) {
  require_frozen(teacher, "eyepad_multi");
  auto out = student.forward(tape, batch.images);
  Tensor task = pad_loss(tape, out.logits, batch.labels);
  return with_distillation(tape, task, out.features, teacher_features(teacher, batch.images), w.lambda1);
}

LossTerms eyepadpp_id(Tape& tape, const EaBatch& batch, const EmbeddingModel& student,
                      const EmbeddingModel& teacher, const LossWeights& w) {
  require_frozen(teacher, "eyepadpp_id");
  Tensor f = student.forward_features(tape, batch.images);
  Tensor task = id_loss(tape, f, batch.labels, w.alpha);
  return with_distillation(tape, task, f, teacher_features(teacher, batch.images), w.lambda2);
}

LossTerms eyepadpp_pad(Tape& tape, const PadBatch& batch, const EmbeddingModel& student,
                       const EmbeddingModel& teacher, const LossWeights& w) {
  require_frozen(teacher, "eyepadpp_pad");
  auto out = student.forward(tape, batch.images);
  Tensor task = pad_loss(tape, out.logits, batch.labels);
  return with_distillation(tape, task, out.features, teacher_features(teacher, batch.images), w.lambda2);
}

namespace {

LossTerms mtmt_terms(Tape& tape, const Tensor& task, const Tensor& features, const Tensor& images,
                     const EmbeddingModel& auth_teacher, const EmbeddingModel& pad_teacher,
                     const LossWeights& w) {
  require_frozen(auth_teacher, "mtmt");
  require_frozen(pad_teacher, "mtmt");
  return with_two_teachers(tape, task, features, teacher_features(auth_teacher, images),
                           teacher_features(pad_teacher, images), w);
}

}  // namespace

LossTerms mtmt_id(Tape& tape, const EaBatch& batch, const EmbeddingModel& model,
                  const EmbeddingModel& auth_teacher, const EmbeddingModel& pad_teacher,
                  const LossWeights& w) {
  Tensor f = model.forward_features(tape, batch.images);
  Tensor task = id_loss(tape, f, batch.labels, w.alpha);
  return mtmt_terms(tape, task, f, batch.images, auth_teacher, pad_teacher, w);
}

LossTerms mtmt_pad(Tape& tape, const PadBatch& batch, const EmbeddingModel& model,
                   const EmbeddingModel& auth_teacher, const EmbeddingModel& pad_teacher,
                   const LossWeights& w) {
  auto out = model.forward(tape, batch.images);
  Tensor task = pad_loss(tape, out.logits, batch.labels);
  return mtmt_terms(tape, task, out.features, batch.images, auth_teacher, pad_teacher, w);
}

}  // namespace eyepad::losses

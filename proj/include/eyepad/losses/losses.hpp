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
#include <vector>

#include "eyepad/autodiff/ops.hpp"
#include "eyepad/models/model.hpp"

namespace eyepad::losses {

using ad::Tape;
using ad::Tensor;
using models::EmbeddingModel;

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  bool operator==(const Triplet&) const = default;
};

using TripletIndices = std::vector<Triplet>;

struct LossWeights {
  double alpha = 1.0;        // triplet margin
  double lambda1 = 2.0;      // EyePAD distillation
  double lambda2 = 0.75;     // EyePAD++ distillation
  double lambda_auth = 1.0;  // MTMT, EA teacher
  double lambda_pad = 1.0;   // MTMT, PAD teacher

  void validate() const;
};

/// Hard mining with every batch element as anchor, in batch order.
///
/// positive = farthest same-class sample, negative = nearest other-class
/// sample, both by squared L2 distance; ties go to the lowest index.
/// Throws PreconditionError if some class has a single sample or the batch
/// has a single class.
TripletIndices mine_triplets(const Tensor& features, std::span<const int> labels);

// mean over triplets of max(|f_p - f_a|^2 - |f_n - f_a|^2 + alpha, 0)
Tensor triplet_loss(Tape& tape, const Tensor& features, const TripletIndices& triplets, double alpha);

// Batch mean of 1 - cos(f_s, f_t).
Tensor distill_loss(Tape& tape, const Tensor& f_s, const Tensor& f_t);

// Mean binary cross-entropy of logistic(logit) against labels (live = 0, spoof = 1).
Tensor pad_loss(Tape& tape, const Tensor& logits, std::span<const int> labels);

struct EaBatch {
  Tensor images;            // [N, H*W]
  std::vector<int> labels;  // identity class per row
};

struct PadBatch {
  Tensor images;
  std::vector<int> labels;  // 0 live, 1 spoof
};

// total = task + weighted distillation; `dis` is the unweighted sum of the
// distillation terms so logs show the raw value.
struct LossTerms {
  Tensor total;
  Tensor task;
  Tensor dis;
};

Tensor id_loss(Tape& tape, const Tensor& features, std::span<const int> labels, double alpha);

// task + lambda * L_dis(f_s, f_t).
LossTerms with_distillation(Tape& tape, const Tensor& task, const Tensor& f_s, const Tensor& f_t, double lambda);
// task + lambda_auth * L_dis(f_auth, f) + lambda_pad * L_dis(f_pad, f).
LossTerms with_two_teachers(Tape& tape, const Tensor& task, const Tensor& f, const Tensor& f_auth,
                            const Tensor& f_pad, const LossWeights& w);

// Naive task losses with no teacher.
LossTerms ea_task(Tape& tape, const EaBatch& batch, const EmbeddingModel& model, const LossWeights& w);
LossTerms pad_task(Tape& tape, const PadBatch& batch, const EmbeddingModel& model);

// L_pad + lambda1 * L_dis(f_s, f_t) on a PAD batch. Teacher must be frozen.
LossTerms eyepad_multi(Tape& tape, const PadBatch& batch, const EmbeddingModel& student,
                       const EmbeddingModel& teacher, const LossWeights& w);

// L_id + lambda2 * L_dis and L_pad + lambda2 * L_dis against the frozen EyePAD student.
LossTerms eyepadpp_id(Tape& tape, const EaBatch& batch, const EmbeddingModel& student,
                      const EmbeddingModel& teacher, const LossWeights& w);
LossTerms eyepadpp_pad(Tape& tape, const PadBatch& batch, const EmbeddingModel& student,
                       const EmbeddingModel& teacher, const LossWeights& w);

// Task loss + lambda_auth * L_dis(f_auth, f_M) + lambda_pad * L_dis(f_pad, f_M).
LossTerms mtmt_id(Tape& tape, const EaBatch& batch, const EmbeddingModel& model,
                  const EmbeddingModel& auth_teacher, const EmbeddingModel& pad_teacher,
                  const LossWeights& w);
LossTerms mtmt_pad(Tape& tape, const PadBatch& batch, const EmbeddingModel& model,
                   const EmbeddingModel& auth_teacher, const EmbeddingModel& pad_teacher,
                   const LossWeights& w);

}  // namespace eyepad::losses

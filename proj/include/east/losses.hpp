// Copyright 2026 The EAsT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Distillation distance losses and task losses. Every function returns a
// 1x1 node on the tape of its inputs.

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "east/autodiff.hpp"
#include "east/targets.hpp"

namespace east {

enum class DistanceLossKind { fitnet, distance_correlation };

const char* to_string(DistanceLossKind kind);

/// Below this distance variance a batch is treated as constant and the
/// distance correlation is defined as 0.
inline constexpr double kDegenerateVariance = 1e-12;

/// Student-side linear map used by FitNet when the student and teacher
/// embedding widths differ. Disabled when compression supplies a target of
/// the student's own width.
struct FitNetProjection {
  Parameter weight;
  Parameter bias;
  bool enabled = false;

  static FitNetProjection disabled();
  /// d_s -> d_t projection; weights uniform in +-1/sqrt(d_s), bias zero.
  static FitNetProjection make(std::size_t student_dim, std::size_t teacher_dim,
                               std::mt19937_64& rng);
};

/// Mean squared difference between the (projected) student embedding and the
/// teacher embedding.
Var fitnet_loss(Var student, Var teacher, FitNetProjection& proj);

/// Squared distance covariance (V-statistic): sum(A .* B) / n^2 for
/// double-centered distance matrices A and B.
Var dcov2(Var a_centered, Var b_centered);

/// Distance correlation of two aligned samples (rows are samples; the
/// column counts may differ):
///   dcov2(A, B) / sqrt(dcov2(A, A) * dcov2(B, B)), clamped to [0, 1],
/// and exactly 0 (no gradient) when either variance is below
/// kDegenerateVariance.
Var dcor(Var x, Var y);

/// Value-only distance correlation with the same definition as dcor(),
/// streamed in O(n) memory so it scales to whole embedding stores.
double dcor_value(const Tensor& x, const Tensor& y);

/// 1 - dcor(student, teacher).
Var dcor_loss(Var student, Var teacher);

/// Dispatches on `kind`; `proj` is only used by FitNet.
Var distance_loss(DistanceLossKind kind, Var student, Var teacher, FitNetProjection& proj);

/// Mean binary cross-entropy on logits, in the overflow-free form
/// max(z,0) - z*t + log(1 + exp(-|z|)). Targets must be 0 or 1.
Var bce_with_logits(Var logits, const Tensor& targets);

/// Mean softmax cross-entropy; computed with the max-shifted log-sum-exp.
Var cross_entropy(Var logits, std::span<const std::size_t> classes);

/// bce_with_logits or cross_entropy depending on the target kind.
Var task_loss(Var logits, const Targets& targets);

}  // namespace east

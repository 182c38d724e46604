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

// Embedding compression: a trainable linear map from the teacher embedding
// to the student's embedding width, plus a linear teacher head. The head's
// classification loss (L_teacher) is the only signal that trains these
// parameters; its backward pass runs with kTeacherLossGate so no student
// parameter is touched. When the compact embedding is used as the target
// of the distance loss it goes through compact_for_distance(), which blocks
// the distance-loss gradient from reaching the transform.

#include <cstddef>
#include <random>
#include <vector>

#include "east/autodiff.hpp"
#include "east/targets.hpp"

namespace east {

inline constexpr TagSet kTeacherLossGate{ParamTag::teacher_transform, ParamTag::teacher_head};

struct CompressionModule {
  Parameter transform_weight;  // d_t x d_s
  Parameter transform_bias;    // 1 x d_s
  Parameter head_weight;       // d_s x c
  Parameter head_bias;         // 1 x c

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static CompressionModule make(std::size_t teacher_dim, std::size_t compact_dim,
                                std::size_t n_classes, std::mt19937_64& rng);

  std::size_t teacher_dim() const { return transform_weight.value.rows(); }
  std::size_t compact_dim() const { return transform_weight.value.cols(); }
  std::size_t n_classes() const { return head_weight.value.cols(); }

  std::vector<Parameter*> parameters();
};

/// teacher * W + b
Var compress(CompressionModule& m, Var teacher);

/// Same values as compress(), with the gradient path into the transform cut.
Var compact_for_distance(CompressionModule& m, Var teacher);

Var teacher_logits(CompressionModule& m, Var compact);

/// Task loss of the teacher head on the compact embedding. Run its backward
/// pass with kTeacherLossGate.
Var teacher_loss(CompressionModule& m, Var compact, const Targets& targets);

}  // namespace east

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

#include "east/compression.hpp"

#include <cmath>

#include "east/error.hpp"
#include "east/losses.hpp"

namespace east {

namespace {

Tensor uniform_fan_in(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w(fan_in, fan_out);
  for (double& v : w.data()) v = u(rng);
  return w;
}

}  // namespace

CompressionModule CompressionModule::make(std::size_t teacher_dim, std::size_t compact_dim,
                                          std::size_t n_classes, std::mt19937_64& rng) {
  if (teacher_dim == 0 || compact_dim == 0 || n_classes == 0) {
    throw ValidationError("compression module dimensions must be positive");
  }
  CompressionModule m;
  m.transform_weight = Parameter("compress.transform.weight",
                                 uniform_fan_in(teacher_dim, compact_dim, rng),
                                 ParamTag::teacher_transform);
  m.transform_bias = Parameter("compress.transform.bias", Tensor(1, compact_dim),
                               ParamTag::teacher_transform);
  m.head_weight = Parameter("compress.head.weight", uniform_fan_in(compact_dim, n_classes, rng),
                            ParamTag::teacher_head);
  m.head_bias = Parameter("compress.head.bias", Tensor(1, n_classes), ParamTag::teacher_head);
  return m;
}

std::vector<Parameter*> CompressionModule::parameters() {
  return {&transform_weight, &transform_bias, &head_weight, &head_bias};
}

Var compress(CompressionModule& m, Var teacher) {
  if (teacher.cols() != m.teacher_dim()) {
    throw ValidationError("compress: teacher embedding has " + std::to_string(teacher.cols()) +
                          " columns, transform expects " + std::to_string(m.teacher_dim()));
  }
  Tape& tape = *teacher.tape();
  return ad::add(ad::matmul(teacher, tape.parameter(m.transform_weight)),
                 tape.parameter(m.transform_bias));
}

Var compact_for_distance(CompressionModule& m, Var teacher) {
  return ad::stop_gradient(compress(m, teacher));
}

Var teacher_logits(CompressionModule& m, Var compact) {
  if (compact.cols() != m.compact_dim()) {
    throw ValidationError("teacher head expects width " + std::to_string(m.compact_dim()) +
                          ", got " + std::to_string(compact.cols()));
  }
  Tape& tape = *compact.tape();
  return ad::add(ad::matmul(compact, tape.parameter(m.head_weight)), tape.parameter(m.head_bias));
}

Var teacher_loss(CompressionModule& m, Var compact, const Targets& targets) {
  if (targets.kind == TaskKind::multilabel && targets.binary.cols() != m.n_classes()) {
    throw ValidationError("teacher_loss: " + std::to_string(targets.binary.cols()) +
                          " label columns for a head with " + std::to_string(m.n_classes()) +
                          " outputs");
  }
  return task_loss(teacher_logits(m, compact), targets);
}

}  // namespace east

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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "east/tensor.hpp"

namespace east {

enum class TaskKind { multilabel, singlelabel };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

/// Supervision for a batch: a binary n x c matrix for multi-label tagging,
/// or one class index per row for single-label classification.
struct Targets {
  TaskKind kind = TaskKind::multilabel;
  Tensor binary;
  std::vector<std::size_t> classes;

  static Targets multilabel(Tensor binary);
  static Targets singlelabel(std::vector<std::size_t> classes);

  std::size_t size() const;
  Targets gather(std::span<const std::size_t> rows) const;
};

}  // namespace east

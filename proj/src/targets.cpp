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

#include "east/targets.hpp"

#include "east/error.hpp"

namespace east {

const char* to_string(TaskKind kind) {
  return kind == TaskKind::multilabel ? "multilabel" : "singlelabel";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "multilabel") return TaskKind::multilabel;
  if (s == "singlelabel") return TaskKind::singlelabel;
  throw ValidationError("unknown task_kind '" + s + "' (expected multilabel or singlelabel)");
}

Targets Targets::multilabel(Tensor binary) {
  Targets t;
  t.kind = TaskKind::multilabel;
  t.binary = std::move(binary);
  return t;
}

Targets Targets::singlelabel(std::vector<std::size_t> classes) {
  Targets t;
  t.kind = TaskKind::singlelabel;
  t.classes = std::move(classes);
  return t;
}

std::size_t Targets::size() const {
  return kind == TaskKind::multilabel ? binary.rows() : classes.size();
}

Targets Targets::gather(std::span<const std::size_t> rows) const {
  if (kind == TaskKind::multilabel) return multilabel(binary.gather_rows(rows));
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(classes.at(r));
  return singlelabel(std::move(out));
}

}  // namespace east

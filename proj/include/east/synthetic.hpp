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

// Synthetic tagging data with a controllable amount of task-irrelevant
// teacher knowledge.
//
//   z ~ N(0, I_k)                           label-generating latent, n x k
//   tag_i = [<w_i, z> > 0]                  i = 0..c-1
//   teacher = [ z Q1 | u Q2 ]               Q1: k x (d_t - r), orthonormal rows
//                                           u: r-dim nuisance, Q2: r x r orthogonal
//   student_input = z M + noise_std * eps   M: k x d_in
//
// The irrelevant block u Q2 is independent of the labels and of the
// student input; `irrelevant_dims` (r) sets its width.
//
// The fixed mixing matrices (Q1, Q2, M, w_i) come from `structure_seed`
// and the per-sample draws (z, u, eps, split permutation) from `seed`, so
// two datasets can share tag definitions while differing in samples and
// nuisance distribution.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "east/manifest.hpp"
#include "east/store.hpp"
#include "east/tensor.hpp"

namespace east {

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t latent_dim = 8;
  std::size_t n_tags = 4;
  std::size_t teacher_dim = 64;
  std::size_t irrelevant_dims = 48;
  std::size_t student_input_dim = 16;
  double noise_std = 0.5;
  std::uint64_t seed = 0;

  /// Defaults to `seed`.
  std::optional<std::uint64_t> structure_seed;
  /// The nuisance latent is drawn as nuisance_shift + nuisance_scale * N(0, 1).
  double nuisance_shift = 0.0;
  double nuisance_scale = 1.0;
  /// Tags whose weight vector is redrawn from an independent stream; they
  /// are named "<tag>_alt" so they never match the original tag.
  std::vector<std::size_t> redraw_tags;
  StoreDtype dtype = StoreDtype::float64;

  void validate() const;
  std::uint64_t effective_structure_seed() const { return structure_seed.value_or(seed); }
};

struct SyntheticData {
  Tensor latent;         // n x k
  Tensor teacher;        // n x d_t
  Tensor student_input;  // n x d_in
  Tensor tags;           // n x c, binary
  std::vector<std::string> tag_names;
  Manifest manifest;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Writes <dir>/teacher.east, <dir>/student_input.east and <dir>/manifest.csv.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, StoreDtype dtype);

/// JSON object with the SyntheticSpec field names; unknown keys are rejected.
SyntheticSpec synthetic_spec_from_json(const std::string& json_text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Orthonormalized Gaussian matrix (modified Gram-Schmidt on the columns).
Tensor random_orthogonal(std::size_t n, std::uint64_t seed);

}  // namespace east

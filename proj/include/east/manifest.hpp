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

// Manifest CSV binding store rows to sample ids, splits and labels:
//
//   id,row,split,labels
//   clip001,0,train,guitar;drums
//   clip002,1,test,piano
//
// `labels` is a semicolon-joined tag list (multi-label) or a single class
// name (single-label); an empty field means "no tags".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "east/error.hpp"
#include "east/targets.hpp"

namespace east {

enum class Split { train, valid, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

class ManifestError : public ValidationError {
 public:
  enum class Code { bad_header, malformed_row, duplicate_id, duplicate_row, row_out_of_range, unknown_split };

  ManifestError(Code code, const std::string& message) : ValidationError(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ManifestEntry {
  std::string id;
  std::uint64_t row = 0;
  Split split = Split::train;
  std::vector<std::string> labels;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  /// Parses CSV text. When `n_rows` is given every row index must be below it.
  static Manifest parse(std::string_view csv, std::optional<std::uint64_t> n_rows = std::nullopt,
                        const std::string& name = "<manifest>");
  static Manifest load(const std::filesystem::path& path,
                       std::optional<std::uint64_t> n_rows = std::nullopt);

  std::string to_csv() const;
  void save(const std::filesystem::path& path) const;

  /// Store rows of a split, in manifest order.
  std::vector<std::size_t> rows(Split split) const;
  std::uint64_t max_row() const;
};

/// Ordered, duplicate-free class/tag names. Index positions are fixed for
/// the lifetime of the object.
struct LabelSpace {
  std::vector<std::string> names;
  TaskKind kind = TaskKind::multilabel;

  /// Sorted union of every label name in the manifest.
  static LabelSpace from_manifest(const Manifest& m, TaskKind kind);

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
};

/// Targets indexed by store row (rows absent from the manifest stay empty /
/// class 0). Single-label entries must carry exactly one known class name.
Targets targets_by_row(const Manifest& m, const LabelSpace& space, std::size_t n_rows);

/// Shuffles the rows of `split` with a permutation fixed by (seed, epoch)
/// and cuts them into batches of `batch_size`; the last batch may be short.
std::vector<std::vector<std::size_t>> make_batches(const Manifest& m, Split split,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch);

/// Pairs of (model label, evaluation-dataset label) from a two-column CSV
/// with header `model_label,eval_label`.
using NameMap = std::vector<std::pair<std::string, std::string>>;
NameMap parse_name_map(std::string_view csv, const std::string& name = "<name-map>");
NameMap load_name_map(const std::filesystem::path& path);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace east

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

#include "east/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace east {

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "unknown";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "valid") return Split::valid;
  if (s == "test") return Split::test;
  throw ManifestError(ManifestError::Code::unknown_split,
                      "unknown split '" + s + "' (expected train, valid or test)");
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

std::vector<std::string> csv_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  if (text.starts_with("\xEF\xBB\xBF")) start = 3;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_labels(const std::string& field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    std::size_t end = field.find(';', start);
    if (end == std::string::npos) end = field.size();
    std::string name = field.substr(start, end - start);
    if (!name.empty()) out.push_back(std::move(name));
    start = end + 1;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Manifest Manifest::parse(std::string_view csv, std::optional<std::uint64_t> n_rows,
                         const std::string& name) {
  using Code = ManifestError::Code;
  const auto lines = csv_lines(csv);
  if (lines.empty()) throw ManifestError(Code::bad_header, name + ": empty manifest");
  const auto header = split_csv_line(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"id", "row", "split", "labels"}) {
    if (!col.contains(required)) {
      throw ManifestError(Code::bad_header,
                          name + ": header is missing column '" + required + "'");
    }
  }
  if (header.size() != 4) {
    throw ManifestError(Code::bad_header, name + ": expected exactly the columns id,row,split,labels");
  }

  Manifest m;
  std::unordered_set<std::string> ids;
  std::unordered_set<std::uint64_t> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = name + ":" + std::to_string(ln + 1);
    if (lines[ln].empty()) continue;
    const auto f = split_csv_line(lines[ln]);
    if (f.size() != 4) {
      throw ManifestError(Code::malformed_row, where + ": expected 4 fields, got " +
                                                   std::to_string(f.size()));
    }
    ManifestEntry e;
    e.id = f[col["id"]];
    if (e.id.empty()) throw ManifestError(Code::malformed_row, where + ": empty id");
    const std::string& row_field = f[col["row"]];
    auto [ptr, ec] = std::from_chars(row_field.data(), row_field.data() + row_field.size(), e.row);
    if (ec != std::errc() || ptr != row_field.data() + row_field.size() || row_field.empty()) {
      throw ManifestError(Code::malformed_row, where + ": row '" + row_field + "' is not an unsigned integer");
    }
    try {
      e.split = split_from_string(f[col["split"]]);
    } catch (const ManifestError& err) {
      throw ManifestError(Code::unknown_split, where + ": " + err.what());
    }
    e.labels = split_labels(f[col["labels"]]);
    if (!ids.insert(e.id).second) {
      throw ManifestError(Code::duplicate_id, where + ": duplicate id '" + e.id + "'");
    }
    if (n_rows && e.row >= *n_rows) {
      throw ManifestError(Code::row_out_of_range, where + ": row " + std::to_string(e.row) +
                                                      " is out of range for a store of " +
                                                      std::to_string(*n_rows) + " rows");
    }
    if (!rows.insert(e.row).second) {
      throw ManifestError(Code::duplicate_row, where + ": row " + std::to_string(e.row) +
                                                   " is referenced twice");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& path, std::optional<std::uint64_t> n_rows) {
  return parse(read_text(path), n_rows, path.string());
}

std::string Manifest::to_csv() const {
  std::ostringstream os;
  os << "id,row,split,labels\n";
  for (const auto& e : entries) {
    std::string labels;
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
      if (i) labels += ';';
      labels += e.labels[i];
    }
    os << quote_if_needed(e.id) << ',' << e.row << ',' << to_string(e.split) << ','
       << quote_if_needed(labels) << '\n';
  }
  return os.str();
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_csv();
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

std::vector<std::size_t> Manifest::rows(Split split) const {
  std::vector<std::size_t> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e.row);
  }
  return out;
}

std::uint64_t Manifest::max_row() const {
  std::uint64_t mx = 0;
  for (const auto& e : entries) mx = std::max(mx, e.row);
  return mx;
}

LabelSpace LabelSpace::from_manifest(const Manifest& m, TaskKind kind) {
  std::set<std::string> names;
  for (const auto& e : m.entries) names.insert(e.labels.begin(), e.labels.end());
  LabelSpace s;
  s.kind = kind;
  s.names.assign(names.begin(), names.end());
  return s;
}

std::optional<std::size_t> LabelSpace::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

Targets targets_by_row(const Manifest& m, const LabelSpace& space, std::size_t n_rows) {
  if (space.kind == TaskKind::multilabel) {
    Tensor binary(n_rows, space.size());
    for (const auto& e : m.entries) {
      if (e.row >= n_rows) throw ValidationError("manifest row " + std::to_string(e.row) + " out of range");
      for (const auto& name : e.labels) {
        auto idx = space.index_of(name);
        if (!idx) throw ValidationError("label '" + name + "' of '" + e.id + "' is not in the label space");
        binary(e.row, *idx) = 1.0;
      }
    }
    return Targets::multilabel(std::move(binary));
  }
  std::vector<std::size_t> classes(n_rows, 0);
  for (const auto& e : m.entries) {
    if (e.row >= n_rows) throw ValidationError("manifest row " + std::to_string(e.row) + " out of range");
    if (e.labels.size() != 1) {
      throw ValidationError("single-label sample '" + e.id + "' has " +
                            std::to_string(e.labels.size()) + " labels");
    }
    auto idx = space.index_of(e.labels[0]);
    if (!idx) throw ValidationError("class '" + e.labels[0] + "' of '" + e.id + "' is not in the label space");
    classes[e.row] = *idx;
  }
  return Targets::singlelabel(std::move(classes));
}

std::vector<std::vector<std::size_t>> make_batches(const Manifest& m, Split split,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch) {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  auto rows = m.rows(split);
  if (rows.empty()) {
    throw ValidationError(std::string("split '") + to_string(split) + "' is empty");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < rows.size(); i += batch_size) {
    const std::size_t end = std::min(rows.size(), i + batch_size);
    batches.emplace_back(rows.begin() + static_cast<std::ptrdiff_t>(i),
                         rows.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

NameMap parse_name_map(std::string_view csv, const std::string& name) {
  const auto lines = csv_lines(csv);
  if (lines.empty()) throw ValidationError(name + ": empty name map");
  const auto header = split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "model_label" || header[1] != "eval_label") {
    throw ValidationError(name + ": header must be 'model_label,eval_label'");
  }
  NameMap out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto f = split_csv_line(lines[ln]);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ValidationError(name + ":" + std::to_string(ln + 1) + ": expected two non-empty fields");
    }
    out.emplace_back(std::move(f[0]), std::move(f[1]));
  }
  return out;
}

NameMap load_name_map(const std::filesystem::path& path) {
  return parse_name_map(read_text(path), path.string());
}

}  // namespace east

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

#include "east/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "east/error.hpp"
#include "east/kernels.hpp"

namespace east {

namespace {

Tensor gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

Tensor orthonormalize_columns(Tensor a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += a(i, j) * a(i, p);
      for (std::size_t i = 0; i < n; ++i) a(i, j) -= dot * a(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw NumericError("random_orthogonal: degenerate Gaussian draw");
    for (std::size_t i = 0; i < n; ++i) a(i, j) /= norm;
  }
  return a;
}

std::string tag_name(std::size_t i, std::size_t n_tags) {
  const std::size_t width = std::to_string(n_tags > 0 ? n_tags - 1 : 0).size();
  std::string digits = std::to_string(i);
  return "tag" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

Tensor random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return orthonormalize_columns(gaussian(n, n, rng));
}

void SyntheticSpec::validate() const {
  if (n < 10) throw ValidationError("synthetic n must be at least 10");
  if (latent_dim == 0 || n_tags == 0 || teacher_dim == 0 || student_input_dim == 0) {
    throw ValidationError("synthetic dimensions must be positive");
  }
  if (latent_dim > teacher_dim || irrelevant_dims > teacher_dim - latent_dim) {
    throw ValidationError("irrelevant_dims (" + std::to_string(irrelevant_dims) +
                          ") must not exceed teacher_dim - latent_dim (" +
                          std::to_string(teacher_dim) + " - " + std::to_string(latent_dim) + ")");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ValidationError("noise_std must be >= 0");
  if (!std::isfinite(nuisance_shift) || !(nuisance_scale >= 0.0) || !std::isfinite(nuisance_scale)) {
    throw ValidationError("nuisance_shift must be finite and nuisance_scale >= 0");
  }
  for (auto t : redraw_tags) {
    if (t >= n_tags) throw ValidationError("redraw_tags entry " + std::to_string(t) + " >= n_tags");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t k = spec.latent_dim;
  const std::size_t relevant = spec.teacher_dim - spec.irrelevant_dims;
  const std::size_t r = spec.irrelevant_dims;
  const std::uint64_t structure = spec.effective_structure_seed();

  // Fixed structure, one stream per object so the draws do not depend on
  // each other's sizes.
  Tensor lift = random_orthogonal(relevant, structure ^ 0x51a7e001ULL).gather_rows([&] {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    return idx;
  }());
  Tensor nuisance_rot = r > 0 ? random_orthogonal(r, structure ^ 0x51a7e002ULL) : Tensor();
  std::mt19937_64 mix_rng(structure ^ 0x51a7e003ULL);
  Tensor mixing = gaussian(k, spec.student_input_dim, mix_rng);
  for (double& v : mixing.data()) v /= std::sqrt(static_cast<double>(k));

  Tensor tag_weights(spec.n_tags, k);
  std::vector<std::string> names(spec.n_tags);
  for (std::size_t t = 0; t < spec.n_tags; ++t) {
    const bool redraw = std::find(spec.redraw_tags.begin(), spec.redraw_tags.end(), t) !=
                        spec.redraw_tags.end();
    std::mt19937_64 tag_rng(structure ^ ((redraw ? 0xa17a0000ULL : 0x7a900000ULL) + t));
    Tensor w = gaussian(1, k, tag_rng);
    std::copy(w.data().begin(), w.data().end(), tag_weights.row(t).begin());
    names[t] = tag_name(t, spec.n_tags) + (redraw ? "_alt" : "");
  }

  // Per-sample draws.
  std::mt19937_64 rng(spec.seed);
  SyntheticData out;
  out.latent = gaussian(spec.n, k, rng);
  Tensor nuisance = gaussian(spec.n, r, rng);
  for (double& v : nuisance.data()) v = spec.nuisance_shift + spec.nuisance_scale * v;
  Tensor noise = gaussian(spec.n, spec.student_input_dim, rng);

  Tensor relevant_part = kernels::serial::matmul(out.latent, lift);
  Tensor nuisance_part = r > 0 ? kernels::serial::matmul(nuisance, nuisance_rot) : Tensor(spec.n, 0);
  out.teacher = Tensor(spec.n, spec.teacher_dim);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < relevant; ++j) out.teacher(i, j) = relevant_part(i, j);
    for (std::size_t j = 0; j < r; ++j) out.teacher(i, relevant + j) = nuisance_part(i, j);
  }
  out.student_input = kernels::serial::matmul(out.latent, mixing);
  for (std::size_t i = 0; i < out.student_input.size(); ++i) {
    out.student_input[i] += spec.noise_std * noise[i];
  }

  out.tags = Tensor(spec.n, spec.n_tags);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t t = 0; t < spec.n_tags; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += tag_weights(t, j) * out.latent(i, j);
      out.tags(i, t) = s > 0.0 ? 1.0 : 0.0;
    }
  }
  out.tag_names = names;

  // 70/10/20 split over a seeded permutation.
  std::vector<std::size_t> perm(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) perm[i] = i;
  std::mt19937_64 split_rng(spec.seed ^ 0x5b117000ULL);
  std::shuffle(perm.begin(), perm.end(), split_rng);
  const std::size_t n_train = spec.n * 7 / 10;
  const std::size_t n_valid = spec.n / 10;
  std::vector<Split> split_of(spec.n, Split::test);
  for (std::size_t p = 0; p < spec.n; ++p) {
    split_of[perm[p]] = p < n_train ? Split::train : (p < n_train + n_valid ? Split::valid : Split::test);
  }
  const std::size_t id_width = std::to_string(spec.n - 1).size();
  for (std::size_t i = 0; i < spec.n; ++i) {
    ManifestEntry e;
    std::string digits = std::to_string(i);
    e.id = "s" + std::string(id_width - digits.size(), '0') + digits;
    e.row = i;
    e.split = split_of[i];
    for (std::size_t t = 0; t < spec.n_tags; ++t) {
      if (out.tags(i, t) == 1.0) e.labels.push_back(names[t]);
    }
    out.manifest.entries.push_back(std::move(e));
  }
  return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, StoreDtype dtype) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_store(dir / "teacher.east", data.teacher, dtype);
  write_store(dir / "student_input.east", data.student_input, dtype);
  data.manifest.save(dir / "manifest.csv");
}

SyntheticSpec synthetic_spec_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synthetic spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("synthetic spec must be a JSON object");
  SyntheticSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n") s.n = v.get<std::size_t>();
      else if (key == "latent_dim") s.latent_dim = v.get<std::size_t>();
      else if (key == "n_tags") s.n_tags = v.get<std::size_t>();
      else if (key == "teacher_dim") s.teacher_dim = v.get<std::size_t>();
      else if (key == "irrelevant_dims") s.irrelevant_dims = v.get<std::size_t>();
      else if (key == "student_input_dim") s.student_input_dim = v.get<std::size_t>();
      else if (key == "noise_std") s.noise_std = v.get<double>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "structure_seed") s.structure_seed = v.get<std::uint64_t>();
      else if (key == "nuisance_shift") s.nuisance_shift = v.get<double>();
      else if (key == "nuisance_scale") s.nuisance_scale = v.get<double>();
      else if (key == "redraw_tags") s.redraw_tags = v.get<std::vector<std::size_t>>();
      else if (key == "dtype") s.dtype = store_dtype_from_string(v.get<std::string>());
      else throw ValidationError("unknown synthetic spec key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synthetic spec has a field of the wrong type: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return synthetic_spec_from_json(ss.str());
}

}  // namespace east

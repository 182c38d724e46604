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

#include "east/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "east/error.hpp"

namespace east {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw DimensionError("ragged rows in Tensor::from_rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(n, m, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (!is_scalar()) throw ContractError("item() on non-scalar tensor " + shape_string());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
  Tensor out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) {
      throw DimensionError("row index " + std::to_string(indices[i]) + " out of range for " +
                           shape_string());
    }
    std::copy_n(data_.begin() + indices[i] * cols_, cols_, out.data_.begin() + i * cols_);
  }
  return out;
}

Tensor Tensor::gather_cols(std::span<const std::size_t> indices) const {
  Tensor out(rows_, indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= cols_) {
      throw DimensionError("column index " + std::to_string(indices[j]) + " out of range for " +
                           shape_string());
    }
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < indices.size(); ++j) out(r, j) = (*this)(r, indices[j]);
  }
  return out;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[' << rows_ << 'x' << cols_ << ']';
  return os.str();
}

}  // namespace east

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

// Per-row bodies shared by the serial and OpenMP kernels.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "east/error.hpp"
#include "east/tensor.hpp"

namespace east::kernels::rows {

inline void check_matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ: " + a.shape_string() + " * " +
                         b.shape_string());
  }
}

inline void check_at_b(const Tensor& a, const Tensor& g) {
  if (a.rows() != g.rows()) {
    throw DimensionError("matmul_at_b: row counts differ: " + a.shape_string() + " vs " +
                         g.shape_string());
  }
}

inline void check_a_bt(const Tensor& g, const Tensor& b) {
  if (g.cols() != b.cols()) {
    throw DimensionError("matmul_a_bt: column counts differ: " + g.shape_string() + " vs " +
                         b.shape_string());
  }
}

inline void check_square(const Tensor& d, const char* what) {
  if (d.rows() != d.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " + d.shape_string());
  }
}

// out.row(i) = a.row(i) * b, accumulated over k in ascending order.
inline void matmul_row(const Tensor& a, const Tensor& b, Tensor& out, std::size_t i) {
  const std::size_t k_dim = a.cols();
  const std::size_t m = b.cols();
  double* o = out.data().data() + i * m;
  for (std::size_t k = 0; k < k_dim; ++k) {
    const double aik = a(i, k);
    const double* brow = b.data().data() + k * m;
    for (std::size_t j = 0; j < m; ++j) o[j] += aik * brow[j];
  }
}

// out.row(r) = sum_i a(i, r) * g.row(i)
inline void at_b_row(const Tensor& a, const Tensor& g, Tensor& out, std::size_t r) {
  const std::size_t n = a.rows();
  const std::size_t m = g.cols();
  double* o = out.data().data() + r * m;
  for (std::size_t i = 0; i < n; ++i) {
    const double air = a(i, r);
    const double* grow = g.data().data() + i * m;
    for (std::size_t j = 0; j < m; ++j) o[j] += air * grow[j];
  }
}

// out(i, r) = <g.row(i), b.row(r)>
inline void a_bt_row(const Tensor& g, const Tensor& b, Tensor& out, std::size_t i) {
  const std::size_t k = b.rows();
  const std::size_t m = g.cols();
  const double* grow = g.data().data() + i * m;
  for (std::size_t r = 0; r < k; ++r) {
    const double* brow = b.data().data() + r * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
    out(i, r) = acc;
  }
}

// Full row j of the distance matrix. Entry (j,k) and (k,j) use the same
// operand order (smaller index first) so the result is exactly symmetric.
inline void distance_row(const Tensor& x, Tensor& out, std::size_t j) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == j) {
      out(j, k) = 0.0;
      continue;
    }
    const std::size_t lo = j < k ? j : k;
    const std::size_t hi = j < k ? k : j;
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = x(lo, c) - x(hi, c);
      acc += diff * diff;
    }
    out(j, k) = std::sqrt(acc);
  }
}

// grad_x.row(j) = sum_k (G_jk + G_kj) (x_j - x_k) / D_jk, zero where D_jk == 0.
inline void distance_backward_row(const Tensor& x, const Tensor& dist, const Tensor& g,
                                  Tensor& out, std::size_t j) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  double* o = out.data().data() + j * d;
  for (std::size_t k = 0; k < n; ++k) {
    const double djk = dist(j, k);
    if (k == j || djk == 0.0) continue;
    const double w = (g(j, k) + g(k, j)) / djk;
    for (std::size_t c = 0; c < d; ++c) o[c] += w * (x(j, c) - x(k, c));
  }
}

struct CenterMeans {
  std::vector<double> row;
  std::vector<double> col;
  double grand = 0.0;
};

inline CenterMeans center_means(const Tensor& d) {
  const std::size_t n = d.rows();
  CenterMeans m;
  m.row.assign(n, 0.0);
  m.col.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      m.row[j] += d(j, k);
      m.col[k] += d(j, k);
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += m.row[j];
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    m.row[j] *= inv;
    m.col[j] *= inv;
  }
  m.grand = total * inv * inv;
  return m;
}

inline void center_row(const Tensor& d, const CenterMeans& m, Tensor& out, std::size_t j) {
  const std::size_t n = d.cols();
  for (std::size_t k = 0; k < n; ++k) out(j, k) = d(j, k) - m.row[j] - m.col[k] + m.grand;
}

inline double row_distance(const Tensor& x, std::size_t j, std::size_t k) {
  const std::size_t lo = j < k ? j : k;
  const std::size_t hi = j < k ? k : j;
  double acc = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double diff = x(lo, c) - x(hi, c);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

inline double distance_row_sum(const Tensor& x, std::size_t j) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.rows(); ++k) {
    if (k != j) acc += row_distance(x, j, k);
  }
  return acc;
}

struct StreamMeans {
  std::vector<double> row;
  double grand = 0.0;
};

inline StreamMeans stream_means(std::vector<double> row_sums) {
  StreamMeans m;
  const double inv = 1.0 / static_cast<double>(row_sums.size());
  double total = 0.0;
  for (double v : row_sums) total += v;
  for (double& v : row_sums) v *= inv;
  m.row = std::move(row_sums);
  m.grand = total * inv * inv;
  return m;
}

// Row j's contribution to the three centered-product sums. Distance
// matrices are symmetric, so row means double as column means.
inline void centered_products_row(const Tensor& x, const Tensor& y, const StreamMeans& mx,
                                  const StreamMeans& my, std::size_t j, double& ab, double& aa,
                                  double& bb) {
  ab = aa = bb = 0.0;
  for (std::size_t k = 0; k < x.rows(); ++k) {
    const double dx = k == j ? 0.0 : row_distance(x, j, k);
    const double dy = k == j ? 0.0 : row_distance(y, j, k);
    const double a = dx - mx.row[j] - mx.row[k] + mx.grand;
    const double b = dy - my.row[j] - my.row[k] + my.grand;
    ab += a * b;
    aa += a * a;
    bb += b * b;
  }
}

inline void check_same_rows(const Tensor& x, const Tensor& y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("sample counts differ: " + x.shape_string() + " vs " + y.shape_string());
  }
}

}  // namespace east::kernels::rows

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

#include "east/kernels.hpp"
#include "kernel_rows.hpp"

namespace east::kernels::serial {

Tensor matmul(const Tensor& a, const Tensor& b) {
  rows::check_matmul(a, b);
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) rows::matmul_row(a, b, out, i);
  return out;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& g) {
  rows::check_at_b(a, g);
  Tensor out(a.cols(), g.cols());
  for (std::size_t r = 0; r < a.cols(); ++r) rows::at_b_row(a, g, out, r);
  return out;
}

Tensor matmul_a_bt(const Tensor& g, const Tensor& b) {
  rows::check_a_bt(g, b);
  Tensor out(g.rows(), b.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) rows::a_bt_row(g, b, out, i);
  return out;
}

Tensor pairwise_euclidean(const Tensor& x) {
  Tensor out(x.rows(), x.rows());
  for (std::size_t j = 0; j < x.rows(); ++j) rows::distance_row(x, out, j);
  return out;
}

Tensor pairwise_euclidean_backward(const Tensor& x, const Tensor& dist, const Tensor& grad_out) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.rows(); ++j) {
    rows::distance_backward_row(x, dist, grad_out, out, j);
  }
  return out;
}

Tensor double_center(const Tensor& d) {
  rows::check_square(d, "double_center");
  const auto means = rows::center_means(d);
  Tensor out(d.rows(), d.cols());
  for (std::size_t j = 0; j < d.rows(); ++j) rows::center_row(d, means, out, j);
  return out;
}

std::vector<double> distance_row_sums(const Tensor& x) {
  std::vector<double> sums(x.rows());
  for (std::size_t j = 0; j < x.rows(); ++j) sums[j] = rows::distance_row_sum(x, j);
  return sums;
}

CenteredProducts centered_distance_products(const Tensor& x, const Tensor& y) {
  rows::check_same_rows(x, y);
  const auto mx = rows::stream_means(distance_row_sums(x));
  const auto my = rows::stream_means(distance_row_sums(y));
  CenteredProducts out;
  for (std::size_t j = 0; j < x.rows(); ++j) {
    double ab, aa, bb;
    rows::centered_products_row(x, y, mx, my, j, ab, aa, bb);
    out.ab += ab;
    out.aa += aa;
    out.bb += bb;
  }
  return out;
}

}  // namespace east::kernels::serial

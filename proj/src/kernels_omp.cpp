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

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "east/kernels.hpp"
#include "kernel_rows.hpp"

namespace east::kernels::parallel {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::int64_t kMinParallelWork = 1 << 15;

bool worth_it(std::size_t a, std::size_t b, std::size_t c) {
  return static_cast<std::int64_t>(a * b * c) >= kMinParallelWork;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  rows::check_matmul(a, b);
  Tensor out(a.rows(), b.cols());
  const auto n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) if (worth_it(a.rows(), a.cols(), b.cols()))
  for (std::int64_t i = 0; i < n; ++i) rows::matmul_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& g) {
  rows::check_at_b(a, g);
  Tensor out(a.cols(), g.cols());
  const auto k = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static) if (worth_it(a.rows(), a.cols(), g.cols()))
  for (std::int64_t r = 0; r < k; ++r) rows::at_b_row(a, g, out, static_cast<std::size_t>(r));
  return out;
}

Tensor matmul_a_bt(const Tensor& g, const Tensor& b) {
  rows::check_a_bt(g, b);
  Tensor out(g.rows(), b.rows());
  const auto n = static_cast<std::int64_t>(g.rows());
#pragma omp parallel for schedule(static) if (worth_it(g.rows(), g.cols(), b.rows()))
  for (std::int64_t i = 0; i < n; ++i) rows::a_bt_row(g, b, out, static_cast<std::size_t>(i));
  return out;
}

Tensor pairwise_euclidean(const Tensor& x) {
  Tensor out(x.rows(), x.rows());
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static) if (worth_it(x.rows(), x.rows(), x.cols()))
  for (std::int64_t j = 0; j < n; ++j) rows::distance_row(x, out, static_cast<std::size_t>(j));
  return out;
}

Tensor pairwise_euclidean_backward(const Tensor& x, const Tensor& dist, const Tensor& grad_out) {
  Tensor out(x.rows(), x.cols());
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static) if (worth_it(x.rows(), x.rows(), x.cols()))
  for (std::int64_t j = 0; j < n; ++j) {
    rows::distance_backward_row(x, dist, grad_out, out, static_cast<std::size_t>(j));
  }
  return out;
}

Tensor double_center(const Tensor& d) {
  rows::check_square(d, "double_center");
  const auto means = rows::center_means(d);
  Tensor out(d.rows(), d.cols());
  const auto n = static_cast<std::int64_t>(d.rows());
#pragma omp parallel for schedule(static) if (worth_it(d.rows(), d.cols(), 4))
  for (std::int64_t j = 0; j < n; ++j) {
    rows::center_row(d, means, out, static_cast<std::size_t>(j));
  }
  return out;
}

std::vector<double> distance_row_sums(const Tensor& x) {
  std::vector<double> sums(x.rows());
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(dynamic, 16) if (worth_it(x.rows(), x.rows(), x.cols()))
  for (std::int64_t j = 0; j < n; ++j) {
    sums[static_cast<std::size_t>(j)] = rows::distance_row_sum(x, static_cast<std::size_t>(j));
  }
  return sums;
}

CenteredProducts centered_distance_products(const Tensor& x, const Tensor& y) {
  rows::check_same_rows(x, y);
  const auto mx = rows::stream_means(distance_row_sums(x));
  const auto my = rows::stream_means(distance_row_sums(y));
  // Per-row partials are reduced serially afterwards, in row order, so the
  // result matches the serial kernel bit for bit.
  const std::size_t n = x.rows();
  std::vector<double> ab(n), aa(n), bb(n);
  const auto ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) if (worth_it(n, n, x.cols() + y.cols()))
  for (std::int64_t j = 0; j < ni; ++j) {
    const auto r = static_cast<std::size_t>(j);
    rows::centered_products_row(x, y, mx, my, r, ab[r], aa[r], bb[r]);
  }
  CenteredProducts out;
  for (std::size_t j = 0; j < n; ++j) {
    out.ab += ab[j];
    out.aa += aa[j];
    out.bb += bb[j];
  }
  return out;
}

}  // namespace east::kernels::parallel

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

// Dense kernels behind the autodiff ops. Each kernel exists twice: a serial
// reference and an OpenMP version that splits the work by output row. Both
// versions run the same per-row code, so every output element is summed in
// the same order and the results are bit-identical regardless of thread
// count. The tests compare the two; bench/ times them.

#include <vector>

#include "east/tensor.hpp"

namespace east::kernels {

/// Sums of (A .* B), (A .* A) and (B .* B) over all entries, where A and B
/// are the double-centered distance matrices of x and y.
struct CenteredProducts {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
};

namespace serial {

/// a[n x k] * b[k x m]
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T * g, with a[n x k], g[n x m] -> [k x m]
Tensor matmul_at_b(const Tensor& a, const Tensor& g);
/// g * b^T, with g[n x m], b[k x m] -> [n x k]
Tensor matmul_a_bt(const Tensor& g, const Tensor& b);
/// Euclidean distance between every pair of rows of x.
Tensor pairwise_euclidean(const Tensor& x);
/// Gradient of sum(grad_out .* pairwise_euclidean(x)) with respect to x.
Tensor pairwise_euclidean_backward(const Tensor& x, const Tensor& dist, const Tensor& grad_out);
/// d - rowmean - colmean + grandmean, for square d.
Tensor double_center(const Tensor& d);
/// Row sums of the distance matrix of x, without materializing it.
std::vector<double> distance_row_sums(const Tensor& x);
/// Streams the double-centered products in O(n) memory; x and y must have
/// the same number of rows.
CenteredProducts centered_distance_products(const Tensor& x, const Tensor& y);

}  // namespace serial

namespace parallel {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_at_b(const Tensor& a, const Tensor& g);
Tensor matmul_a_bt(const Tensor& g, const Tensor& b);
Tensor pairwise_euclidean(const Tensor& x);
Tensor pairwise_euclidean_backward(const Tensor& x, const Tensor& dist, const Tensor& grad_out);
Tensor double_center(const Tensor& d);
std::vector<double> distance_row_sums(const Tensor& x);
CenteredProducts centered_distance_products(const Tensor& x, const Tensor& y);

/// Number of threads the OpenMP runtime would use (1 without OpenMP).
int max_threads();

}  // namespace parallel

}  // namespace east::kernels

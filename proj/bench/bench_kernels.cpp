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


// Serial vs OpenMP kernel timings. Run with OMP_NUM_THREADS to pick the
// thread count, e.g. OMP_NUM_THREADS=4 ./bench_kernels

#include <benchmark/benchmark.h>

#include <random>

#include "east/kernels.hpp"
#include "east/losses.hpp"

namespace {

using east::Tensor;
namespace serial = east::kernels::serial;
namespace parallel = east::kernels::parallel;

Tensor random(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t(r, c);
  for (auto& v : t.data()) v = g(rng);
  return t;
}

template <Tensor (*Fn)(const Tensor&, const Tensor&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random(n, 128, 1), b = random(128, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 128 * 64));
}

template <Tensor (*Fn)(const Tensor&)>
void BM_Pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random(n, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
}

template <Tensor (*Fn)(const Tensor&, const Tensor&, const Tensor&)>
void BM_PairwiseBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random(n, 64, 4);
  const Tensor d = serial::pairwise_euclidean(x);
  const Tensor g = random(n, n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, d, g));
}

template <Tensor (*Fn)(const Tensor&)>
void BM_DoubleCenter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor d = serial::pairwise_euclidean(random(n, 16, 6));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(d));
}

template <east::kernels::CenteredProducts (*Fn)(const Tensor&, const Tensor&)>
void BM_StreamedDcor(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random(n, 64, 7), y = random(n, 16, 8);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y));
}

// Forward dcor on the tape, as used once per training batch.
void BM_DcorTape(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random(n, 64, 9), y = random(n, 64, 10);
  for (auto _ : state) {
    east::Tape tape;
    benchmark::DoNotOptimize(east::dcor(tape.input(x), tape.input(y)).value().item());
  }
}

}  // namespace

BENCHMARK(BM_Matmul<serial::matmul>)->Name("matmul/serial")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_Matmul<parallel::matmul>)->Name("matmul/omp")->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_Pairwise<serial::pairwise_euclidean>)->Name("pairwise/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_Pairwise<parallel::pairwise_euclidean>)->Name("pairwise/omp")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_PairwiseBackward<serial::pairwise_euclidean_backward>)->Name("pairwise_backward/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_PairwiseBackward<parallel::pairwise_euclidean_backward>)->Name("pairwise_backward/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_DoubleCenter<serial::double_center>)->Name("double_center/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_DoubleCenter<parallel::double_center>)->Name("double_center/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_StreamedDcor<serial::centered_distance_products>)->Name("dcor_streamed/serial")->Arg(512)->Arg(2048);
BENCHMARK(BM_StreamedDcor<parallel::centered_distance_products>)->Name("dcor_streamed/omp")->Arg(512)->Arg(2048);
BENCHMARK(BM_DcorTape)->Name("dcor_tape")->Arg(64)->Arg(256);

BENCHMARK_MAIN();

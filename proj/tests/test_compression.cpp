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


#include <gtest/gtest.h>

#include <random>

#include "east/compression.hpp"
#include "east/error.hpp"
#include "east/losses.hpp"
#include "east/student.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace east;
using testutil::bit_equal;
using testutil::random_tensor;

namespace {

CompressionModule fixed_module(const Tensor& w, std::size_t n_classes = 2) {
  std::mt19937_64 rng(0);
  auto m = CompressionModule::make(w.rows(), w.cols(), n_classes, rng);
  m.transform_weight.value = w;
  return m;
}

}  // namespace

TEST(Compression, Examples) {
  Tape tape;
  auto ident = fixed_module(Tensor::identity(3));
  const Tensor t = Tensor::from_rows({{1, -2, 3}, {0.5, 0, 7}});
  EXPECT_EQ(compress(ident, tape.input(t)).value(), t);

  auto ones = fixed_module(Tensor::from_rows({{1}, {1}, {1}}));
  EXPECT_EQ(compress(ones, tape.input(Tensor::from_rows({{1, 2, 3}}))).value(), Tensor::from_rows({{6}}));
}

TEST(Compression, MatchesMatmulOracle) {
  std::mt19937_64 rng(1);
  auto m = CompressionModule::make(7, 3, 2, rng);
  m.transform_bias.value = random_tensor(rng, 1, 3);
  const auto t = oracle::random_matrix(rng, 5, 7);
  auto want = oracle::matmul(t, testutil::to_matrix(m.transform_weight.value));
  Tape tape;
  const Tensor got = compress(m, tape.input(testutil::to_tensor(t))).value();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_LT(std::abs(got(i, j) - want[i][j] - m.transform_bias.value(0, j)), 1e-12);
}

TEST(Compression, RejectsWrongTeacherWidth) {
  std::mt19937_64 rng(2);
  auto m = CompressionModule::make(6, 3, 2, rng);
  Tape tape;
  EXPECT_THROW(compress(m, tape.input(Tensor(4, 5))), ValidationError);
}

TEST(Compression, TagsAndInit) {
  std::mt19937_64 rng(3);
  auto m = CompressionModule::make(16, 4, 3, rng);
  for (auto* p : m.parameters()) EXPECT_NE(p->tag, ParamTag::student);
  EXPECT_EQ(m.transform_weight.tag, ParamTag::teacher_transform);
  EXPECT_EQ(m.transform_bias.tag, ParamTag::teacher_transform);
  EXPECT_EQ(m.head_weight.tag, ParamTag::teacher_head);
  EXPECT_EQ(m.head_bias.tag, ParamTag::teacher_head);
  for (double v : m.transform_weight.value.data()) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_EQ(m.transform_bias.value, Tensor(1, 4, 0.0));
  EXPECT_EQ(m.compact_dim(), 4u);
  EXPECT_EQ(m.teacher_dim(), 16u);
  EXPECT_EQ(m.n_classes(), 3u);
}

TEST(Compression, IsAffine) {
  std::mt19937_64 rng(4);
  auto m = CompressionModule::make(5, 3, 2, rng);
  m.transform_bias.value = random_tensor(rng, 1, 3);
  const Tensor x = random_tensor(rng, 4, 5);
  const Tensor y = random_tensor(rng, 4, 5);
  const double alpha = 0.7, beta = -1.9;
  Tensor mix = x;
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * x[i] + beta * y[i];
  Tape tape;
  const Tensor cm = compress(m, tape.input(mix)).value();
  const Tensor cx = compress(m, tape.input(x)).value();
  const Tensor cy = compress(m, tape.input(y)).value();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double want = alpha * cx(i, j) + beta * cy(i, j) - (alpha + beta - 1.0) * m.transform_bias.value(0, j);
      EXPECT_LT(std::abs(cm(i, j) - want), 1e-10);
    }
}

TEST(TeacherLoss, NearZeroForDominantCorrectLogits) {
  auto m = fixed_module(Tensor::identity(2));
  m.head_weight.value = Tensor::from_rows({{100, -100}, {-100, 100}});
  Tape tape;
  auto compact = compress(m, tape.input(Tensor::from_rows({{1, 0}, {0, 1}})));
  EXPECT_LT(teacher_loss(m, compact, Targets::singlelabel({0, 1})).value().item(), 1e-40);
  EXPECT_LT(teacher_loss(m, compact, Targets::multilabel(Tensor::from_rows({{1, 0}, {0, 1}}))).value().item(), 1e-40);
  EXPECT_THROW(teacher_loss(m, compact, Targets::multilabel(Tensor(2, 3))), ValidationError);
}

TEST(TeacherLoss, LeavesStudentGradsAtZero) {
  std::mt19937_64 rng(5);
  auto student = StudentModel::make({6, {5, 3}, 2}, rng);
  auto m = CompressionModule::make(8, 3, 2, rng);
  Tape tape;
  auto out = student.forward(tape, tape.input(random_tensor(rng, 4, 6)));
  auto compact = compress(m, tape.input(random_tensor(rng, 4, 8)));
  // Both models on one tape, joined through the root.
  auto root = ad::add(teacher_loss(m, compact, Targets::singlelabel({0, 1, 1, 0})),
                      ad::scale(ad::mean(out.embedding), 0.0));
  tape.backward(root, kTeacherLossGate);
  for (auto* p : student.parameters()) EXPECT_TRUE(bit_equal(p->grad, Tensor(p->value.rows(), p->value.cols())));
  bool moved = false;
  for (double v : m.transform_weight.grad.data()) moved |= v != 0.0;
  EXPECT_TRUE(moved);
}

TEST(TeacherLoss, TransformGradient) {
  std::mt19937_64 rng(6);
  for (int seed = 0; seed < 5; ++seed) {
    auto m = CompressionModule::make(6, 3, 4, rng);
    const Tensor t = random_tensor(rng, 4, 6);
    Tensor bin(4, 4);
    for (std::size_t i = 0; i < bin.size(); ++i) bin[i] = (i * 7 + seed) % 3 == 0 ? 1.0 : 0.0;
    auto loss = [&](Tape& tape) { return teacher_loss(m, compress(m, tape.input(t)), Targets::multilabel(bin)); };
    EXPECT_LT(testutil::param_grad_error(loss, m.transform_weight, kTeacherLossGate), 1e-4);
    EXPECT_LT(testutil::param_grad_error(loss, m.head_weight, kTeacherLossGate), 1e-4);
  }
}

TEST(CompactForDistance, SameValuesNoTransformGradient) {
  std::mt19937_64 rng(7);
  auto m = CompressionModule::make(8, 3, 2, rng);
  Parameter s("s", random_tensor(rng, 6, 3), ParamTag::student);
  const Tensor t = random_tensor(rng, 6, 8);
  Tape tape;
  auto plain = compress(m, tape.input(t));
  auto cut = compact_for_distance(m, tape.input(t));
  EXPECT_TRUE(bit_equal(plain.value(), cut.value()));

  tape.backward(dcor_loss(tape.parameter(s), cut), TagSet::all());
  EXPECT_EQ(m.transform_weight.grad, Tensor(8, 3, 0.0));
  EXPECT_EQ(m.transform_bias.grad, Tensor(1, 3, 0.0));
  bool moved = false;
  for (double v : s.grad.data()) moved |= v != 0.0;
  EXPECT_TRUE(moved);
}

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

#include "east/losses.hpp"

#include <algorithm>
#include <cmath>

#include "east/error.hpp"
#include "east/kernels.hpp"

namespace east {

const char* to_string(DistanceLossKind kind) {
  return kind == DistanceLossKind::fitnet ? "fitnet" : "distance_correlation";
}

FitNetProjection FitNetProjection::disabled() {
  FitNetProjection p;
  p.enabled = false;
  return p;
}

FitNetProjection FitNetProjection::make(std::size_t student_dim, std::size_t teacher_dim,
                                        std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(student_dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w(student_dim, teacher_dim);
  for (double& v : w.data()) v = u(rng);
  FitNetProjection p;
  p.weight = Parameter("fitnet_proj.weight", std::move(w), ParamTag::student);
  p.bias = Parameter("fitnet_proj.bias", Tensor(1, teacher_dim), ParamTag::student);
  p.enabled = true;
  return p;
}

Var fitnet_loss(Var student, Var teacher, FitNetProjection& proj) {
  if (student.rows() != teacher.rows()) {
    throw DimensionError("fitnet_loss: batch sizes differ: " + student.value().shape_string() +
                         " vs " + teacher.value().shape_string());
  }
  if (student.rows() == 0) throw BatchTooSmallError("fitnet_loss on an empty batch");
  Tape& tape = *student.tape();
  Var s = student;
  if (proj.enabled) {
    s = ad::add(ad::matmul(s, tape.parameter(proj.weight)), tape.parameter(proj.bias));
  } else if (student.cols() != teacher.cols()) {
    throw ValidationError("fitnet_loss: student width " + std::to_string(student.cols()) +
                          " differs from teacher width " + std::to_string(teacher.cols()) +
                          " and no projection is enabled");
  }
  Var diff = ad::sub(s, teacher);
  return ad::mean(ad::mul(diff, diff));
}

Var dcov2(Var a_centered, Var b_centered) {
  const Tensor& a = a_centered.value();
  const Tensor& b = b_centered.value();
  if (a.rows() != a.cols() || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("dcov2: expected two n x n matrices, got " + a.shape_string() + " and " +
                         b.shape_string());
  }
  const double n = static_cast<double>(a.rows());
  return ad::scale(ad::sum_all(ad::mul(a_centered, b_centered)), 1.0 / (n * n));
}

Var dcor(Var x, Var y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("dcor: sample counts differ: " + x.value().shape_string() + " vs " +
                         y.value().shape_string());
  }
  if (x.rows() < 2) {
    throw BatchTooSmallError("dcor needs at least 2 samples, got " + std::to_string(x.rows()));
  }
  Tape& tape = *x.tape();
  Var a = ad::double_center(ad::pairwise_euclidean(x));
  Var b = ad::double_center(ad::pairwise_euclidean(y));
  Var var_a = dcov2(a, a);
  Var var_b = dcov2(b, b);
  if (var_a.value().item() < kDegenerateVariance || var_b.value().item() < kDegenerateVariance) {
    return tape.input(Tensor(1, 1, 0.0));
  }
  Var cov = dcov2(a, b);
  return ad::clamp(ad::div(cov, ad::sqrt(ad::mul(var_a, var_b))), 0.0, 1.0);
}

double dcor_value(const Tensor& x, const Tensor& y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("dcor: sample counts differ: " + x.shape_string() + " vs " + y.shape_string());
  }
  if (x.rows() < 2) {
    throw BatchTooSmallError("dcor needs at least 2 samples, got " + std::to_string(x.rows()));
  }
  const auto p = kernels::parallel::centered_distance_products(x, y);
  const double n2 = static_cast<double>(x.rows()) * static_cast<double>(x.rows());
  const double var_a = p.aa / n2;
  const double var_b = p.bb / n2;
  if (var_a < kDegenerateVariance || var_b < kDegenerateVariance) return 0.0;
  return std::clamp((p.ab / n2) / std::sqrt(var_a * var_b), 0.0, 1.0);
}

Var dcor_loss(Var student, Var teacher) {
  Var one = student.tape()->input(Tensor(1, 1, 1.0));
  return ad::sub(one, dcor(student, teacher));
}

Var distance_loss(DistanceLossKind kind, Var student, Var teacher, FitNetProjection& proj) {
  return kind == DistanceLossKind::fitnet ? fitnet_loss(student, teacher, proj)
                                          : dcor_loss(student, teacher);
}

Var bce_with_logits(Var logits, const Tensor& targets) {
  const Tensor& z = logits.value();
  if (z.rows() != targets.rows() || z.cols() != targets.cols()) {
    throw DimensionError("bce_with_logits: logits " + z.shape_string() + " vs targets " +
                         targets.shape_string());
  }
  if (z.size() == 0) throw DimensionError("bce_with_logits on an empty batch");
  for (double t : targets.data()) {
    if (t != 0.0 && t != 1.0) {
      throw ValidationError("bce_with_logits: targets must be 0 or 1, found " + std::to_string(t));
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = z[i];
    total += std::max(v, 0.0) - v * targets[i] + std::log1p(std::exp(-std::abs(v)));
  }
  const double inv = 1.0 / static_cast<double>(z.size());
  const NodeId iz = logits.id();
  return logits.tape()->record(
      OpKind::bce_with_logits, {iz}, Tensor(1, 1, total * inv),
      [iz, targets, inv](Tape& tape, const Tensor& g) {
        const Tensor& zv = tape.value(iz);
        Tensor d(zv.rows(), zv.cols());
        const double gs = g.item() * inv;
        for (std::size_t i = 0; i < zv.size(); ++i) {
          const double v = zv[i];
          const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
          d[i] = gs * (s - targets[i]);
        }
        tape.accumulate(iz, d);
      });
}

Var cross_entropy(Var logits, std::span<const std::size_t> classes) {
  const Tensor& z = logits.value();
  if (z.rows() != classes.size()) {
    throw DimensionError("cross_entropy: " + std::to_string(z.rows()) + " rows of logits but " +
                         std::to_string(classes.size()) + " labels");
  }
  if (z.rows() == 0) throw DimensionError("cross_entropy on an empty batch");
  const std::size_t c = z.cols();
  for (auto k : classes) {
    if (k >= c) {
      throw ValidationError("cross_entropy: class index " + std::to_string(k) +
                            " out of range for " + std::to_string(c) + " classes");
    }
  }
  // Softmax probabilities are kept for the backward pass.
  Tensor prob(z.rows(), c);
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double mx = z(r, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z(r, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      prob(r, j) = std::exp(z(r, j) - mx);
      sum += prob(r, j);
    }
    for (std::size_t j = 0; j < c; ++j) prob(r, j) /= sum;
    total += mx + std::log(sum) - z(r, classes[r]);
  }
  const double inv = 1.0 / static_cast<double>(z.rows());
  std::vector<std::size_t> labels(classes.begin(), classes.end());
  const NodeId iz = logits.id();
  return logits.tape()->record(OpKind::cross_entropy, {iz}, Tensor(1, 1, total * inv),
                               [iz, prob, labels, inv](Tape& tape, const Tensor& g) {
                                 Tensor d = prob;
                                 for (std::size_t r = 0; r < d.rows(); ++r) d(r, labels[r]) -= 1.0;
                                 const double gs = g.item() * inv;
                                 for (double& v : d.data()) v *= gs;
                                 tape.accumulate(iz, d);
                               });
}

Var task_loss(Var logits, const Targets& targets) {
  return targets.kind == TaskKind::multilabel ? bce_with_logits(logits, targets.binary)
                                              : cross_entropy(logits, targets.classes);
}

}  // namespace east

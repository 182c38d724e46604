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

#include "east/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "east/error.hpp"
#include "east/kernels.hpp"

namespace east {

const char* to_string(ParamTag tag) {
  switch (tag) {
    case ParamTag::student:
      return "student";
    case ParamTag::teacher_transform:
      return "teacher_transform";
    case ParamTag::teacher_head:
      return "teacher_head";
  }
  return "unknown";
}

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::input: return "input";
    case OpKind::parameter: return "parameter";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::add_row: return "add_row";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::scale: return "scale";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::sqrt: return "sqrt";
    case OpKind::clamp: return "clamp";
    case OpKind::mean: return "mean";
    case OpKind::sum_all: return "sum_all";
    case OpKind::pairwise_euclidean: return "pairwise_euclidean";
    case OpKind::double_center: return "double_center";
    case OpKind::stop_gradient: return "stop_gradient";
    case OpKind::bce_with_logits: return "bce_with_logits";
    case OpKind::cross_entropy: return "cross_entropy";
  }
  return "unknown";
}

Parameter::Parameter(std::string name, Tensor value, ParamTag tag)
    : name(std::move(name)),
      value(std::move(value)),
      grad(this->value.rows(), this->value.cols()),
      tag(tag) {}

void Parameter::zero_grad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = Tensor(value.rows(), value.cols());
  } else {
    grad.fill(0.0);
  }
}

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::input(Tensor value, bool requires_grad) {
  Var v = record(OpKind::input, {}, std::move(value), nullptr);
  nodes_[v.id()].requires_grad = requires_grad;
  return v;
}

Var Tape::parameter(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Var v = record(OpKind::parameter, {}, p.value, nullptr);
  nodes_[v.id()].param = &p;
  nodes_[v.id()].requires_grad = true;
  bound_.emplace(&p, v.id());
  return v;
}

Var Tape::record(OpKind kind, std::vector<NodeId> parents, Tensor value, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + to_string(kind) +
                       " (output " + value.shape_string() + ")");
  }
  bool any_parent_tracked = false;
  for (NodeId p : parents) {
    if (p >= nodes_.size()) throw ContractError("parent node id out of range");
    any_parent_tracked = any_parent_tracked || nodes_[p].requires_grad;
  }
  const bool differentiable = any_parent_tracked && backward != nullptr;
  Node node{kind, std::move(parents), std::move(value), Tensor(), std::move(backward), nullptr,
            differentiable};
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(NodeId id, const Tensor& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
    return;
  }
  auto dst = n.grad.data();
  auto src = delta.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var root, TagSet gate) {
  if (root.tape() != this) throw ContractError("backward root belongs to another tape");
  const NodeId r = root.id();
  if (!nodes_[r].value.is_scalar()) {
    throw ContractError("backward root must be 1x1, got " + nodes_[r].value.shape_string());
  }
  for (auto& n : nodes_) n.grad = Tensor();
  nodes_[r].grad = Tensor(1, 1, 1.0);

  for (NodeId i = r + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, n.grad);
  }

  for (auto& n : nodes_) {
    if (n.param == nullptr || n.grad.size() == 0) continue;
    Parameter& p = *n.param;
    if (!p.trainable || !gate.contains(p.tag)) continue;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
    auto dst = p.grad.data();
    auto src = n.grad.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id());
  if (n.grad.size() == 0) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

namespace ad {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ContractError("operands live on different tapes");
  }
  return *a.tape();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.rows(), x.cols());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.rows(), a.cols());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const NodeId ia = a.id(), ib = b.id();
  return t.record(OpKind::matmul, {ia, ib}, kernels::parallel::matmul(a.value(), b.value()),
                  [ia, ib](Tape& tape, const Tensor& g) {
                    if (tape.requires_grad(ia)) {
                      tape.accumulate(ia, kernels::parallel::matmul_a_bt(g, tape.value(ib)));
                    }
                    if (tape.requires_grad(ib)) {
                      tape.accumulate(ib, kernels::parallel::matmul_at_b(tape.value(ia), g));
                    }
                  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const NodeId ia = a.id(), ib = b.id();
  if (y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols()) {
    Tensor out = x;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += y(0, c);
    }
    return t.record(OpKind::add_row, {ia, ib}, std::move(out),
                    [ia, ib](Tape& tape, const Tensor& g) {
                      tape.accumulate(ia, g);
                      if (tape.requires_grad(ib)) {
                        Tensor col(1, g.cols());
                        for (std::size_t r = 0; r < g.rows(); ++r) {
                          for (std::size_t c = 0; c < g.cols(); ++c) col(0, c) += g(r, c);
                        }
                        tape.accumulate(ib, col);
                      }
                    });
  }
  check_same_shape(x, y, "add");
  return t.record(OpKind::add, {ia, ib}, zip(x, y, [](double p, double q) { return p + q; }),
                  [ia, ib](Tape& tape, const Tensor& g) {
                    tape.accumulate(ia, g);
                    tape.accumulate(ib, g);
                  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  check_same_shape(a.value(), b.value(), "sub");
  const NodeId ia = a.id(), ib = b.id();
  return t.record(OpKind::sub, {ia, ib},
                  zip(a.value(), b.value(), [](double p, double q) { return p - q; }),
                  [ia, ib](Tape& tape, const Tensor& g) {
                    tape.accumulate(ia, g);
                    if (tape.requires_grad(ib)) tape.accumulate(ib, map(g, [](double v) { return -v; }));
                  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  check_same_shape(a.value(), b.value(), "mul");
  const NodeId ia = a.id(), ib = b.id();
  return t.record(OpKind::mul, {ia, ib},
                  zip(a.value(), b.value(), [](double p, double q) { return p * q; }),
                  [ia, ib](Tape& tape, const Tensor& g) {
                    auto times = [](double p, double q) { return p * q; };
                    if (tape.requires_grad(ia)) tape.accumulate(ia, zip(g, tape.value(ib), times));
                    if (tape.requires_grad(ib)) tape.accumulate(ib, zip(g, tape.value(ia), times));
                  });
}

Var div(Var a, Var b) {
  Tape& t = same_tape(a, b);
  check_same_shape(a.value(), b.value(), "div");
  const NodeId ia = a.id(), ib = b.id();
  return t.record(OpKind::div, {ia, ib},
                  zip(a.value(), b.value(), [](double p, double q) { return p / q; }),
                  [ia, ib](Tape& tape, const Tensor& g) {
                    const Tensor& x = tape.value(ia);
                    const Tensor& y = tape.value(ib);
                    if (tape.requires_grad(ia)) {
                      tape.accumulate(ia, zip(g, y, [](double gv, double q) { return gv / q; }));
                    }
                    if (tape.requires_grad(ib)) {
                      Tensor d(g.rows(), g.cols());
                      for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i] * x[i] / (y[i] * y[i]);
                      tape.accumulate(ib, d);
                    }
                  });
}

Var scale(Var x, double s) {
  const NodeId ix = x.id();
  return x.tape()->record(OpKind::scale, {ix}, map(x.value(), [s](double v) { return v * s; }),
                          [ix, s](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, map(g, [s](double v) { return v * s; }));
                          });
}

Var relu(Var x) {
  const NodeId ix = x.id();
  return x.tape()->record(OpKind::relu, {ix},
                          map(x.value(), [](double v) { return v > 0.0 ? v : 0.0; }),
                          [ix](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, zip(g, tape.value(ix), [](double gv, double v) {
                                              return v > 0.0 ? gv : 0.0;
                                            }));
                          });
}

Var sigmoid(Var x) {
  const NodeId ix = x.id();
  Tensor s = map(x.value(), stable_sigmoid);
  return x.tape()->record(OpKind::sigmoid, {ix}, s, [ix, s](Tape& tape, const Tensor& g) {
    tape.accumulate(ix, zip(g, s, [](double gv, double sv) { return gv * sv * (1.0 - sv); }));
  });
}

Var sqrt(Var x) {
  const NodeId ix = x.id();
  Tensor r = map(x.value(), [](double v) { return std::sqrt(v); });
  return x.tape()->record(OpKind::sqrt, {ix}, r, [ix, r](Tape& tape, const Tensor& g) {
    tape.accumulate(ix, zip(g, r, [](double gv, double rv) { return 0.5 * gv / rv; }));
  });
}

Var clamp(Var x, double lo, double hi) {
  const NodeId ix = x.id();
  return x.tape()->record(OpKind::clamp, {ix},
                          map(x.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); }),
                          [ix, lo, hi](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, zip(g, tape.value(ix), [lo, hi](double gv, double v) {
                                              return (v >= lo && v <= hi) ? gv : 0.0;
                                            }));
                          });
}

Var sum_all(Var x) {
  const NodeId ix = x.id();
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t rows = x.rows(), cols = x.cols();
  return x.tape()->record(OpKind::sum_all, {ix}, Tensor(1, 1, total),
                          [ix, rows, cols](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, Tensor(rows, cols, g.item()));
                          });
}

Var mean(Var x) {
  const NodeId ix = x.id();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (rows * cols == 0) throw DimensionError("mean of an empty tensor");
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const double inv = 1.0 / static_cast<double>(rows * cols);
  return x.tape()->record(OpKind::mean, {ix}, Tensor(1, 1, total * inv),
                          [ix, rows, cols, inv](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, Tensor(rows, cols, g.item() * inv));
                          });
}

Var pairwise_euclidean(Var x) {
  if (x.rows() < 2) {
    throw BatchTooSmallError("pairwise_euclidean needs at least 2 rows, got " +
                             std::to_string(x.rows()));
  }
  const NodeId ix = x.id();
  Tensor dist = kernels::parallel::pairwise_euclidean(x.value());
  return x.tape()->record(OpKind::pairwise_euclidean, {ix}, dist,
                          [ix, dist](Tape& tape, const Tensor& g) {
                            tape.accumulate(ix, kernels::parallel::pairwise_euclidean_backward(
                                                    tape.value(ix), dist, g));
                          });
}

Var double_center(Var d) {
  const NodeId id = d.id();
  // The centering map is self-adjoint, so its backward is centering again.
  return d.tape()->record(OpKind::double_center, {id}, kernels::parallel::double_center(d.value()),
                          [id](Tape& tape, const Tensor& g) {
                            tape.accumulate(id, kernels::parallel::double_center(g));
                          });
}

Var stop_gradient(Var x) {
  return x.tape()->record(OpKind::stop_gradient, {x.id()}, x.value(), nullptr);
}

}  // namespace ad

}  // namespace east

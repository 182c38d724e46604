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

// Minimal reverse-mode automatic differentiation over 2-D tensors.
//
// A Tape records one forward computation as an append-only list of nodes.
// Each node owns its forward value and a closure that pushes its output
// gradient to its parents. backward() walks the nodes once in reverse
// insertion order and finally adds leaf gradients into the Parameters whose
// tag is in the requested gate set; every other Parameter is left untouched.
//
// A Tape is rebuilt for every training step and is confined to one thread.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "east/tensor.hpp"

namespace east {

enum class ParamTag : std::uint8_t { student = 0, teacher_transform = 1, teacher_head = 2 };

const char* to_string(ParamTag tag);

/// Small set of parameter tags, used as the gradient gate of a backward pass.
class TagSet {
 public:
  constexpr TagSet() = default;
  constexpr TagSet(std::initializer_list<ParamTag> tags) {
    for (auto t : tags) bits_ |= bit(t);
  }
  static constexpr TagSet all() {
    return {ParamTag::student, ParamTag::teacher_transform, ParamTag::teacher_head};
  }
  constexpr bool contains(ParamTag t) const { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr TagSet operator|(TagSet o) const {
    TagSet s;
    s.bits_ = bits_ | o.bits_;
    return s;
  }
  constexpr bool operator==(const TagSet&) const = default;

 private:
  static constexpr std::uint8_t bit(ParamTag t) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

/// A trainable tensor with its gradient buffer and parameter-group tag.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, ParamTag tag);

  void zero_grad();

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  ParamTag tag = ParamTag::student;
};

using NodeId = std::size_t;

enum class OpKind : std::uint8_t {
  input,
  parameter,
  matmul,
  add,
  add_row,
  sub,
  mul,
  div,
  scale,
  relu,
  sigmoid,
  sqrt,
  clamp,
  mean,
  sum_all,
  pairwise_euclidean,
  double_center,
  stop_gradient,
  bce_with_logits,
  cross_entropy,
};

const char* to_string(OpKind kind);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its Tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  NodeId id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

class Tape {
 public:
  /// Pushes the output gradient `g` of the node into its parents' gradients.
  using BackwardFn = std::function<void(Tape& tape, const Tensor& g)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf holding a plain value. With requires_grad the gradient reaching
  /// it can be read back through grad() after backward().
  Var input(Tensor value, bool requires_grad = false);
  /// Leaf bound to a Parameter. Binding the same Parameter twice returns the
  /// same node.
  Var parameter(Parameter& p);

  /// Appends a node. Throws NumericError when `value` is not finite.
  Var record(OpKind kind, std::vector<NodeId> parents, Tensor value, BackwardFn backward);

  /// Reverse pass from a 1x1 root. Parameters with a tag in `gate` get the
  /// leaf gradient added to their grad; all others are left bit-identical.
  void backward(Var root, TagSet gate);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  /// Gradient of the last backward() root with respect to node `v`; zeros
  /// when nothing reached it.
  Tensor grad(Var v) const;
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  OpKind kind(NodeId id) const { return nodes_[id].kind; }
  const std::vector<NodeId>& parents(NodeId id) const { return nodes_[id].parents; }
  std::size_t size() const { return nodes_.size(); }

  /// Adds `delta` into the gradient buffer of node `id` (used by BackwardFns).
  void accumulate(NodeId id, const Tensor& delta);

 private:
  struct Node {
    OpKind kind;
    std::vector<NodeId> parents;
    Tensor value;
    Tensor grad;  // empty until something flows into it
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> bound_;
};

namespace ad {

Var matmul(Var a, Var b);
/// a + b for equal shapes; a 1 x cols `b` is broadcast over the rows of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var x, double s);
Var relu(Var x);
Var sigmoid(Var x);
Var sqrt(Var x);
/// Clamps to [lo, hi]; entries that were clamped receive no gradient.
Var clamp(Var x, double lo, double hi);
/// Mean over all entries, as a 1x1 node.
Var mean(Var x);
Var sum_all(Var x);
/// n x n matrix of row-to-row Euclidean distances; needs n >= 2. The
/// gradient at coincident rows (distance 0) is taken as 0.
Var pairwise_euclidean(Var x);
Var double_center(Var d);
/// Same value as x; no gradient flows back through it.
Var stop_gradient(Var x);

}  // namespace ad

}  // namespace east

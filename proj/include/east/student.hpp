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

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "east/autodiff.hpp"

namespace east {

enum class Activation { relu, none };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Parameter weight;  // fan_in x fan_out
  Parameter bias;    // 1 x fan_out
  Activation activation = Activation::none;

  Var forward(Tape& tape, Var x);
};

struct StudentConfig {
  std::size_t input_dim = 0;
  /// One dense layer per entry; the last width is the embedding width d_s.
  std::vector<std::size_t> widths{128, 64};
  std::size_t n_classes = 0;
  /// Activation of the embedding layer; hidden layers always use ReLU.
  Activation embed_activation = Activation::none;
};

/// Feed-forward student: dense layers up to the embedding, then a linear
/// head to the task logits. All parameters carry the student tag.
class StudentModel {
 public:
  struct Output {
    Var embedding;
    Var logits;
  };

  StudentModel() = default;
  /// Weights uniform in +-1/sqrt(fan_in), biases zero, drawn from `rng`.
  static StudentModel make(const StudentConfig& config, std::mt19937_64& rng);
  /// Rebuilds a model around existing layers (checkpoint loading).
  StudentModel(std::vector<DenseLayer> layers, DenseLayer head);

  Output forward(Tape& tape, Var x);

  std::size_t input_dim() const { return layers_.front().weight.value.rows(); }
  std::size_t embed_dim() const { return head_.weight.value.rows(); }
  std::size_t n_classes() const { return head_.weight.value.cols(); }

  std::vector<Parameter*> parameters();
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& head() const { return head_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  DenseLayer& head() { return head_; }

 private:
  std::vector<DenseLayer> layers_;
  DenseLayer head_;
};

/// Plain SGD over the parameters whose tag is in `gate`:
///   p <- p - lr * (grad + weight_decay * p), then grad <- 0.
/// All gated gradients are checked first; a non-finite one aborts the step
/// (nothing is modified) with a NumericError naming the step, the parameter
/// and its gradient norm.
void sgd_step(std::span<Parameter* const> params, TagSet gate, double lr, double weight_decay,
              std::size_t step_index = 0);

}  // namespace east

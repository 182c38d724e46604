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

#include "east/student.hpp"

#include <cmath>
#include <sstream>

#include "east/error.hpp"

namespace east {

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "none"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "none") return Activation::none;
  throw ValidationError("unknown activation '" + s + "' (expected relu or none)");
}

Var DenseLayer::forward(Tape& tape, Var x) {
  Var y = ad::add(ad::matmul(x, tape.parameter(weight)), tape.parameter(bias));
  return activation == Activation::relu ? ad::relu(y) : y;
}

namespace {

DenseLayer make_layer(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                      Activation act, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w(fan_in, fan_out);
  for (double& v : w.data()) v = u(rng);
  return DenseLayer{Parameter(name + ".weight", std::move(w), ParamTag::student),
                    Parameter(name + ".bias", Tensor(1, fan_out), ParamTag::student), act};
}

}  // namespace

StudentModel StudentModel::make(const StudentConfig& config, std::mt19937_64& rng) {
  if (config.input_dim == 0 || config.n_classes == 0) {
    throw ValidationError("student input_dim and n_classes must be positive");
  }
  if (config.widths.empty()) throw ValidationError("student widths must name at least one layer");
  std::vector<DenseLayer> layers;
  std::size_t fan_in = config.input_dim;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    if (config.widths[i] == 0) throw ValidationError("student layer widths must be positive");
    const bool last = i + 1 == config.widths.size();
    layers.push_back(make_layer("student.layer" + std::to_string(i), fan_in, config.widths[i],
                                last ? config.embed_activation : Activation::relu, rng));
    fan_in = config.widths[i];
  }
  DenseLayer head = make_layer("student.head", fan_in, config.n_classes, Activation::none, rng);
  return StudentModel(std::move(layers), std::move(head));
}

StudentModel::StudentModel(std::vector<DenseLayer> layers, DenseLayer head)
    : layers_(std::move(layers)), head_(std::move(head)) {
  if (layers_.empty()) throw ValidationError("student needs at least one layer");
  std::size_t width = layers_.front().weight.value.rows();
  for (const auto& l : layers_) {
    if (l.weight.value.rows() != width) throw DimensionError("student layers do not chain");
    width = l.weight.value.cols();
  }
  if (head_.weight.value.rows() != width) throw DimensionError("student head does not chain");
}

StudentModel::Output StudentModel::forward(Tape& tape, Var x) {
  if (x.cols() != input_dim()) {
    throw ValidationError("student expects " + std::to_string(input_dim()) +
                          " input features, got " + std::to_string(x.cols()));
  }
  Var h = x;
  for (auto& layer : layers_) h = layer.forward(tape, h);
  return {h, head_.forward(tape, h)};
}

std::vector<Parameter*> StudentModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

void sgd_step(std::span<Parameter* const> params, TagSet gate, double lr, double weight_decay,
              std::size_t step_index) {
  if (!(lr >= 0.0) || !(weight_decay >= 0.0)) {
    throw ValidationError("sgd_step: lr and weight_decay must be non-negative");
  }
  for (const Parameter* p : params) {
    if (!p->trainable || !gate.contains(p->tag)) continue;
    if (!p->grad.all_finite()) {
      double norm = 0.0;
      for (double g : p->grad.data()) norm += g * g;
      std::ostringstream os;
      os << "non-finite gradient at step " << step_index << " in parameter '" << p->name
         << "' (tag " << to_string(p->tag) << ", grad norm " << std::sqrt(norm) << ")";
      throw NumericError(os.str());
    }
  }
  for (Parameter* p : params) {
    if (!p->trainable || !gate.contains(p->tag)) continue;
    auto v = p->value.data();
    auto g = p->grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * (g[i] + weight_decay * v[i]);
    p->zero_grad();
  }
}

}  // namespace east

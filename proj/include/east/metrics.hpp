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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "east/manifest.hpp"
#include "east/tensor.hpp"

namespace east {

struct MetricReport {
  /// In label-space order; classes without positives are absent here and
  /// listed in skipped_classes instead.
  std::vector<std::pair<std::string, double>> per_class_ap;
  double map = 0.0;
  std::optional<double> accuracy;
  std::size_t n_eval = 0;
  std::vector<std::string> skipped_classes;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
};

/// Average precision of one class: rank by score (descending, ties kept in
/// input order) and average positives-seen / rank over the positive ranks.
/// Returns nullopt when there is no positive label.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const double> labels);

/// Macro mean of per-class AP over classes with at least one positive.
/// Throws ValidationError when no class has a positive.
MetricReport mean_average_precision(const Tensor& scores, const Tensor& labels,
                                    const std::vector<std::string>& names);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Tensor& logits, std::span<const std::size_t> labels);

/// Multi-label accuracy: fraction of (sample, tag) cells where the sign of
/// the logit (> 0 means predicted positive) matches the binary label.
double tag_accuracy(const Tensor& logits, const Tensor& labels);

/// Scores a model trained on label space `a` against labels from dataset `b`,
/// restricted to the mapped class pairs; no retraining involved. Per-class
/// entries are keyed by the `b` names.
MetricReport overlap_eval(const Tensor& scores, const LabelSpace& a, const Tensor& labels_b,
                          const LabelSpace& b, const NameMap& name_map);

}  // namespace east

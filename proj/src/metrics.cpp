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

#include "east/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "east/error.hpp"

namespace east {

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  nlohmann::json ap = nlohmann::json::object();
  for (const auto& [name, v] : per_class_ap) ap[name] = v;
  j["per_class_ap"] = ap;
  j["map"] = map;
  j["accuracy"] = accuracy ? nlohmann::json(*accuracy) : nlohmann::json(nullptr);
  j["n_eval"] = n_eval;
  j["skipped_classes"] = skipped_classes;
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  for (const auto& [name, v] : j.at("per_class_ap").items()) r.per_class_ap.emplace_back(name, v.get<double>());
  r.map = j.at("map").get<double>();
  if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
  r.n_eval = j.at("n_eval").get<std::size_t>();
  r.skipped_classes = j.at("skipped_classes").get<std::vector<std::string>>();
  return r;
}

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("average_precision: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] > 0.5) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0.0) return std::nullopt;
  return sum / hits;
}

MetricReport mean_average_precision(const Tensor& scores, const Tensor& labels,
                                    const std::vector<std::string>& names) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
    throw DimensionError("mean_average_precision: scores " + scores.shape_string() + " vs labels " +
                         labels.shape_string());
  }
  if (names.size() != scores.cols()) {
    throw DimensionError("mean_average_precision: " + std::to_string(names.size()) +
                         " class names for " + std::to_string(scores.cols()) + " columns");
  }
  MetricReport report;
  report.n_eval = scores.rows();
  std::vector<double> s(scores.rows()), l(scores.rows());
  double total = 0.0;
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      s[i] = scores(i, c);
      l[i] = labels(i, c);
    }
    if (auto ap = average_precision(s, l)) {
      report.per_class_ap.emplace_back(names[c], *ap);
      total += *ap;
    } else {
      report.skipped_classes.push_back(names[c]);
    }
  }
  if (report.per_class_ap.empty()) {
    throw ValidationError("mean_average_precision: no class has a positive label");
  }
  report.map = total / static_cast<double>(report.per_class_ap.size());
  return report;
}

double accuracy(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rows() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(logits.rows()) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (logits.rows() == 0 || logits.cols() == 0) throw DimensionError("accuracy on an empty batch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

double tag_accuracy(const Tensor& logits, const Tensor& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols()) {
    throw DimensionError("tag_accuracy: logits " + logits.shape_string() + " vs labels " +
                         labels.shape_string());
  }
  if (logits.size() == 0) throw DimensionError("tag_accuracy on an empty batch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if ((logits[i] > 0.0) == (labels[i] > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.size());
}

MetricReport overlap_eval(const Tensor& scores, const LabelSpace& a, const Tensor& labels_b,
                          const LabelSpace& b, const NameMap& name_map) {
  if (name_map.empty()) throw ValidationError("overlap_eval: the name map is empty");
  if (scores.cols() != a.size() || labels_b.cols() != b.size()) {
    throw DimensionError("overlap_eval: score/label widths do not match their label spaces");
  }
  std::vector<std::size_t> cols_a, cols_b;
  std::vector<std::string> names;
  for (const auto& [name_a, name_b] : name_map) {
    auto ia = a.index_of(name_a);
    if (!ia) throw ValidationError("overlap_eval: model label '" + name_a + "' is unknown");
    auto ib = b.index_of(name_b);
    if (!ib) throw ValidationError("overlap_eval: evaluation label '" + name_b + "' is unknown");
    cols_a.push_back(*ia);
    cols_b.push_back(*ib);
    names.push_back(name_b);
  }
  return mean_average_precision(scores.gather_cols(cols_a), labels_b.gather_cols(cols_b), names);
}

}  // namespace east

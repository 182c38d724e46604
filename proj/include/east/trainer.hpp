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

// Experiment orchestration for the six training regimes:
//
//   baseline             student trained on the task loss only
//   teacher_lr           logistic regression on the raw teacher embeddings
//   east_fitnet          task + lambda * FitNet(student, teacher)
//   east_fitnet_linear   task + lambda * FitNet(student, compact) + L_teacher
//   east_dc              task + lambda * (1 - dCor(student, teacher))
//   east_dc_linear       task + lambda * (1 - dCor(student, compact)) + L_teacher
//
// Numerics run on one thread in a fixed order, so a run is a pure function
// of its config and input files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "east/compression.hpp"
#include "east/losses.hpp"
#include "east/manifest.hpp"
#include "east/metrics.hpp"
#include "east/student.hpp"
#include "east/targets.hpp"

namespace east {

enum class Regime { baseline, teacher_lr, east_fitnet, east_fitnet_linear, east_dc, east_dc_linear };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);
bool uses_compression(Regime r);
std::optional<DistanceLossKind> distance_kind(Regime r);

/// Fixed stopping rule of the teacher_lr regime.
inline constexpr double kTeacherLrGradTol = 1e-6;
inline constexpr std::size_t kTeacherLrMaxEpochs = 5000;

struct TrainConfig {
  Regime regime = Regime::baseline;
  double lambda_distill = 1.0;
  double lr = 0.05;
  double weight_decay = 0.0;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  TaskKind task_kind = TaskKind::multilabel;
  std::vector<std::size_t> student_widths{128, 64};
  Activation embed_activation = Activation::none;
  bool distance_updates_transform = false;
  std::string teacher_store;
  std::string student_store;
  std::string manifest;
  std::string output_dir;

  void validate() const;
  nlohmann::json to_json() const;
  /// Exact key names of this struct; unknown keys are a ValidationError.
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Reads a JSON config; relative paths are resolved against the config
/// file's directory.
TrainConfig load_train_config(const std::filesystem::path& path);

/// Every trainable piece of an experiment. Which members are populated
/// depends on the regime.
struct Models {
  Regime regime = Regime::baseline;
  std::optional<StudentModel> student;
  FitNetProjection projection;  // enabled only for east_fitnet when widths differ
  std::optional<CompressionModule> compression;
  std::optional<DenseLayer> probe;  // teacher_lr: linear map on teacher embeddings

  /// Draws initial parameters from `rng`: student, then projection, then
  /// compression (or the probe for teacher_lr).
  static Models make(const TrainConfig& config, std::size_t input_dim, std::size_t teacher_dim,
                     std::size_t n_classes, std::mt19937_64& rng);

  std::vector<Parameter*> parameters();
  /// Input expected by predict(): student features, or teacher embeddings
  /// for teacher_lr.
  std::size_t input_dim() const;
  std::size_t n_classes() const;
};

/// Task logits for a batch of inputs, computed without gradient tracking.
Tensor predict(Models& models, const Tensor& inputs);

/// Which losses a step computes. The trainer always uses the defaults; the
/// switches exist for ablations (a step driven by a single loss).
struct StepToggles {
  bool task = true;
  bool distance = true;
  bool teacher = true;
};

struct StepReport {
  std::optional<double> task_loss;
  std::optional<double> distance_loss;
  std::optional<double> teacher_loss;
};

/// One optimization step on a batch (not used by teacher_lr).
///
/// Student-side losses (task + lambda * distance) are back-propagated with
/// gate {student}, plus {teacher_transform} when distance_updates_transform
/// is set. L_teacher is back-propagated separately with kTeacherLossGate.
/// Then one SGD update is applied to each parameter group that some computed
/// loss drives. The distance loss is skipped on batches of fewer than two
/// samples.
StepReport train_step(Models& models, const TrainConfig& config, const Tensor& student_inputs,
                      const Tensor& teacher_embeddings, const Targets& targets,
                      std::size_t step_index, StepToggles toggles = {});

/// In-memory inputs of an experiment; rows are addressed by the manifest.
struct ExperimentData {
  Tensor teacher;        // may be empty for baseline
  Tensor student_input;  // may be empty for teacher_lr
  Manifest manifest;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::optional<double> task_loss;
  std::optional<double> distance_loss;
  std::optional<double> teacher_loss;
  MetricReport valid;
  double valid_score = 0.0;
};

struct ExperimentResult {
  LabelSpace labels;
  Models best;
  Models last;
  std::size_t best_epoch = 0;
  std::size_t last_epoch = 0;
  std::vector<EpochRecord> history;
  MetricReport test;
  std::vector<double> epoch_seconds;
};

/// Validation score used for model selection: mAP for multi-label tasks,
/// accuracy for single-label tasks.
double selection_score(const MetricReport& r, TaskKind kind);

/// mAP (plus tag accuracy or class accuracy) of `models` on the given rows.
MetricReport evaluate_rows(Models& models, const Tensor& inputs, const Targets& targets,
                           const LabelSpace& labels, std::span<const std::size_t> rows);

/// Trains in memory. Deterministic for a fixed config.
ExperimentResult train_experiment(const TrainConfig& config, const ExperimentData& data);

struct Checkpoint {
  TrainConfig config;
  std::size_t epoch = 0;
  LabelSpace labels;
  Models models;
  nlohmann::json history = nlohmann::json::array();
  std::optional<MetricReport> test;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json history_to_json(const std::vector<EpochRecord>& history);

/// Loads the configured files, trains, and writes <output_dir>/report.json,
/// ckpt_best.bin, ckpt_last.bin and timing.json (wall-clock per epoch, kept
/// out of the other files so those stay byte-reproducible).
ExperimentResult run_experiment(const TrainConfig& config);

/// Scores a checkpoint on one split of a store/manifest pair. With a name
/// map the scores are restricted to the mapped classes (overlap_eval) and
/// labels are read in the evaluation dataset's own label space.
MetricReport evaluate_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& store,
                                 const std::filesystem::path& manifest, Split split,
                                 const std::optional<NameMap>& name_map = std::nullopt);

}  // namespace east

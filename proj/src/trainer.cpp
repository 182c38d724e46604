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

#include "east/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "east/error.hpp"
#include "east/store.hpp"

namespace east {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::baseline: return "baseline";
    case Regime::teacher_lr: return "teacher_lr";
    case Regime::east_fitnet: return "east_fitnet";
    case Regime::east_fitnet_linear: return "east_fitnet_linear";
    case Regime::east_dc: return "east_dc";
    case Regime::east_dc_linear: return "east_dc_linear";
  }
  return "unknown";
}

Regime regime_from_string(const std::string& s) {
  for (Regime r : {Regime::baseline, Regime::teacher_lr, Regime::east_fitnet,
                   Regime::east_fitnet_linear, Regime::east_dc, Regime::east_dc_linear}) {
    if (s == to_string(r)) return r;
  }
  throw ValidationError("unknown regime '" + s + "'");
}

bool uses_compression(Regime r) {
  return r == Regime::east_fitnet_linear || r == Regime::east_dc_linear;
}

std::optional<DistanceLossKind> distance_kind(Regime r) {
  switch (r) {
    case Regime::east_fitnet:
    case Regime::east_fitnet_linear:
      return DistanceLossKind::fitnet;
    case Regime::east_dc:
    case Regime::east_dc_linear:
      return DistanceLossKind::distance_correlation;
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// TrainConfig

void TrainConfig::validate() const {
  if (!(lambda_distill >= 0.0) || !std::isfinite(lambda_distill)) {
    throw ValidationError("lambda_distill must be a finite value >= 0");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be a finite value > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ValidationError("weight_decay must be a finite value >= 0");
  }
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (distance_kind(regime) && batch_size < 2) {
    throw ValidationError("batch_size must be >= 2 when a distance loss is active");
  }
  if (regime != Regime::teacher_lr) {
    if (student_widths.empty()) throw ValidationError("student_widths must not be empty");
    for (auto w : student_widths) {
      if (w == 0) throw ValidationError("student_widths entries must be positive");
    }
  }
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["regime"] = to_string(regime);
  j["lambda_distill"] = lambda_distill;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["task_kind"] = east::to_string(task_kind);
  j["student_widths"] = student_widths;
  j["embed_activation"] = east::to_string(embed_activation);
  j["distance_updates_transform"] = distance_updates_transform;
  j["teacher_store"] = teacher_store;
  j["student_store"] = student_store;
  j["manifest"] = manifest;
  j["output_dir"] = output_dir;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "regime") c.regime = regime_from_string(v.get<std::string>());
      else if (key == "lambda_distill") c.lambda_distill = v.get<double>();
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "task_kind") c.task_kind = task_kind_from_string(v.get<std::string>());
      else if (key == "student_widths") c.student_widths = v.get<std::vector<std::size_t>>();
      else if (key == "embed_activation") c.embed_activation = activation_from_string(v.get<std::string>());
      else if (key == "distance_updates_transform") c.distance_updates_transform = v.get<bool>();
      else if (key == "teacher_store") c.teacher_store = v.get<std::string>();
      else if (key == "student_store") c.student_store = v.get<std::string>();
      else if (key == "manifest") c.manifest = v.get<std::string>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config field has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  TrainConfig c = TrainConfig::from_json(j);
  const auto base = path.parent_path();
  for (std::string* p : {&c.teacher_store, &c.student_store, &c.manifest, &c.output_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Models

namespace {

DenseLayer make_probe(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w(in, out);
  for (double& v : w.data()) v = u(rng);
  return DenseLayer{Parameter("probe.weight", std::move(w), ParamTag::teacher_head),
                    Parameter("probe.bias", Tensor(1, out), ParamTag::teacher_head),
                    Activation::none};
}

}  // namespace

Models Models::make(const TrainConfig& config, std::size_t input_dim, std::size_t teacher_dim,
                    std::size_t n_classes, std::mt19937_64& rng) {
  Models m;
  m.regime = config.regime;
  if (config.regime == Regime::teacher_lr) {
    m.probe = make_probe(teacher_dim, n_classes, rng);
    return m;
  }
  StudentConfig sc;
  sc.input_dim = input_dim;
  sc.widths = config.student_widths;
  sc.n_classes = n_classes;
  sc.embed_activation = config.embed_activation;
  m.student = StudentModel::make(sc, rng);
  const std::size_t d_s = m.student->embed_dim();
  if (config.regime == Regime::east_fitnet && d_s != teacher_dim) {
    m.projection = FitNetProjection::make(d_s, teacher_dim, rng);
  }
  if (uses_compression(config.regime)) {
    m.compression = CompressionModule::make(teacher_dim, d_s, n_classes, rng);
  }
  return m;
}

std::vector<Parameter*> Models::parameters() {
  std::vector<Parameter*> out;
  if (student) out = student->parameters();
  if (projection.enabled) {
    out.push_back(&projection.weight);
    out.push_back(&projection.bias);
  }
  if (compression) {
    for (auto* p : compression->parameters()) out.push_back(p);
  }
  if (probe) {
    out.push_back(&probe->weight);
    out.push_back(&probe->bias);
  }
  return out;
}

std::size_t Models::input_dim() const {
  if (probe) return probe->weight.value.rows();
  return student->input_dim();
}

std::size_t Models::n_classes() const {
  if (probe) return probe->weight.value.cols();
  return student->n_classes();
}

Tensor predict(Models& models, const Tensor& inputs) {
  if (inputs.cols() != models.input_dim()) {
    throw ValidationError("model expects input dimension " + std::to_string(models.input_dim()) +
                          ", got " + std::to_string(inputs.cols()));
  }
  Tape tape;
  Var x = tape.input(inputs);
  if (models.probe) return models.probe->forward(tape, x).value();
  return models.student->forward(tape, x).logits.value();
}

// ---------------------------------------------------------------------------
// Training step

StepReport train_step(Models& models, const TrainConfig& config, const Tensor& student_inputs,
                      const Tensor& teacher_embeddings, const Targets& targets,
                      std::size_t step_index, StepToggles toggles) {
  if (!models.student) throw ContractError("train_step needs a student model");
  auto params = models.parameters();
  for (auto* p : params) p->zero_grad();

  StepReport report;
  Tape tape;
  Var x = tape.input(student_inputs);
  auto out = models.student->forward(tape, x);

  std::optional<Var> student_objective;
  if (toggles.task) {
    Var task = task_loss(out.logits, targets);
    report.task_loss = task.value().item();
    student_objective = task;
  }

  const auto kind = distance_kind(config.regime);
  const std::size_t n = student_inputs.rows();
  std::optional<Var> compact;
  if (models.compression && (toggles.teacher || (kind && toggles.distance))) {
    compact = compress(*models.compression, tape.input(teacher_embeddings));
  }

  bool distance_computed = false;
  if (kind && toggles.distance && n >= 2) {
    Var target = compact ? (config.distance_updates_transform ? *compact : ad::stop_gradient(*compact))
                         : tape.input(teacher_embeddings);
    Var dist = distance_loss(*kind, out.embedding, target, models.projection);
    report.distance_loss = dist.value().item();
    Var weighted = ad::scale(dist, config.lambda_distill);
    student_objective = student_objective ? ad::add(*student_objective, weighted) : weighted;
    distance_computed = true;
  }

  TagSet step_gate;
  if (student_objective) {
    TagSet gate{ParamTag::student};
    if (distance_computed && models.compression && config.distance_updates_transform) {
      gate = gate | TagSet{ParamTag::teacher_transform};
    }
    tape.backward(*student_objective, gate);
    step_gate = step_gate | gate;
  }

  if (models.compression && toggles.teacher) {
    Var lt = teacher_loss(*models.compression, *compact, targets);
    report.teacher_loss = lt.value().item();
    tape.backward(lt, kTeacherLossGate);
    step_gate = step_gate | kTeacherLossGate;
  }

  if (!step_gate.empty()) sgd_step(params, step_gate, config.lr, config.weight_decay, step_index);
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

double selection_score(const MetricReport& r, TaskKind kind) {
  if (kind == TaskKind::singlelabel) return r.accuracy.value_or(0.0);
  return r.map;
}

namespace {

Tensor label_matrix(const Targets& t, std::size_t n_classes) {
  if (t.kind == TaskKind::multilabel) return t.binary;
  Tensor onehot(t.classes.size(), n_classes);
  for (std::size_t i = 0; i < t.classes.size(); ++i) onehot(i, t.classes[i]) = 1.0;
  return onehot;
}

}  // namespace

MetricReport evaluate_rows(Models& models, const Tensor& inputs, const Targets& targets,
                           const LabelSpace& labels, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ValidationError("cannot evaluate an empty split");
  Tensor logits = predict(models, inputs.gather_rows(rows));
  Targets t = targets.gather(rows);
  MetricReport r = mean_average_precision(logits, label_matrix(t, labels.size()), labels.names);
  r.accuracy = t.kind == TaskKind::multilabel ? tag_accuracy(logits, t.binary)
                                              : accuracy(logits, t.classes);
  return r;
}

// ---------------------------------------------------------------------------
// Experiment loop

namespace {

using EpochCallback =
    std::function<void(std::size_t epoch, const Models& current, const std::vector<EpochRecord>&)>;

void check_rows(const Manifest& m, const Tensor& store, const char* what) {
  if (store.rows() == 0) return;
  if (!m.entries.empty() && m.max_row() >= store.rows()) {
    throw ValidationError(std::string("manifest references row ") + std::to_string(m.max_row()) +
                          " but the " + what + " store has " + std::to_string(store.rows()) +
                          " rows");
  }
}

void fit_teacher_lr(Models& models, const TrainConfig& config, const Tensor& teacher,
                    const Targets& targets, std::span<const std::size_t> train_rows,
                    EpochRecord& record) {
  const Tensor x_all = teacher.gather_rows(train_rows);
  const Targets t_all = targets.gather(train_rows);
  auto params = models.parameters();
  const TagSet gate{ParamTag::teacher_head};
  std::size_t it = 0;
  double loss = 0.0;
  for (; it < kTeacherLrMaxEpochs; ++it) {
    for (auto* p : params) p->zero_grad();
    Tape tape;
    Var l = task_loss(models.probe->forward(tape, tape.input(x_all)), t_all);
    loss = l.value().item();
    tape.backward(l, gate);
    double sq = 0.0;
    for (auto* p : params) {
      for (double g : p->grad.data()) sq += g * g;
    }
    if (std::sqrt(sq) < kTeacherLrGradTol) break;
    sgd_step(params, gate, config.lr, config.weight_decay, it);
  }
  for (auto* p : params) p->zero_grad();
  record.epoch = it;
  record.task_loss = loss;
}

ExperimentResult train_impl(const TrainConfig& config, const ExperimentData& data,
                            const EpochCallback& on_epoch) {
  config.validate();
  const bool needs_teacher = config.regime != Regime::baseline;
  const bool needs_student = config.regime != Regime::teacher_lr;
  if (needs_teacher && data.teacher.size() == 0) {
    throw ValidationError(std::string("regime ") + to_string(config.regime) + " needs teacher embeddings");
  }
  if (needs_student && data.student_input.size() == 0) {
    throw ValidationError(std::string("regime ") + to_string(config.regime) + " needs student inputs");
  }
  if (needs_teacher && needs_student && data.teacher.rows() != data.student_input.rows()) {
    throw ValidationError("teacher and student stores have different row counts (" +
                          std::to_string(data.teacher.rows()) + " vs " +
                          std::to_string(data.student_input.rows()) + ")");
  }
  if (needs_teacher) check_rows(data.manifest, data.teacher, "teacher");
  if (needs_student) check_rows(data.manifest, data.student_input, "student input");

  ExperimentResult result;
  result.labels = LabelSpace::from_manifest(data.manifest, config.task_kind);
  if (result.labels.size() == 0) throw ValidationError("the manifest carries no labels");
  const std::size_t n_rows = needs_student ? data.student_input.rows() : data.teacher.rows();
  const Targets targets = targets_by_row(data.manifest, result.labels, n_rows);
  const auto train_rows = data.manifest.rows(Split::train);
  const auto valid_rows = data.manifest.rows(Split::valid);
  const auto test_rows = data.manifest.rows(Split::test);
  if (train_rows.empty()) throw ValidationError("split 'train' is empty");
  if (valid_rows.empty()) throw ValidationError("split 'valid' is empty");
  if (test_rows.empty()) throw ValidationError("split 'test' is empty");

  std::mt19937_64 rng(config.seed);
  Models models = Models::make(config, needs_student ? data.student_input.cols() : 0,
                               needs_teacher ? data.teacher.cols() : 0, result.labels.size(), rng);
  const Tensor& inputs = needs_student ? data.student_input : data.teacher;

  auto evaluate_into = [&](EpochRecord& rec) {
    rec.valid = evaluate_rows(models, inputs, targets, result.labels, valid_rows);
    rec.valid_score = selection_score(rec.valid, config.task_kind);
  };

  if (config.regime == Regime::teacher_lr) {
    EpochRecord rec;
    fit_teacher_lr(models, config, data.teacher, targets, train_rows, rec);
    evaluate_into(rec);
    result.history.push_back(rec);
    result.best = models;
    result.best_epoch = rec.epoch;
    result.last_epoch = rec.epoch;
  } else {
    EpochRecord initial;
    evaluate_into(initial);
    result.history.push_back(initial);
    result.best = models;
    double best_score = initial.valid_score;
    std::size_t step = 0;
    const Tensor empty;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      const auto start = std::chrono::steady_clock::now();
      const auto batches = make_batches(data.manifest, Split::train, config.batch_size, config.seed, epoch);
      double task_sum = 0.0, dist_sum = 0.0, teacher_sum = 0.0;
      std::size_t task_n = 0, dist_n = 0, teacher_n = 0;
      for (const auto& batch : batches) {
        const Tensor xb = data.student_input.gather_rows(batch);
        const Tensor tb = needs_teacher ? data.teacher.gather_rows(batch) : empty;
        const auto rep = train_step(models, config, xb, tb, targets.gather(batch), step++);
        if (rep.task_loss) task_sum += *rep.task_loss, ++task_n;
        if (rep.distance_loss) dist_sum += *rep.distance_loss, ++dist_n;
        if (rep.teacher_loss) teacher_sum += *rep.teacher_loss, ++teacher_n;
      }
      EpochRecord rec;
      rec.epoch = epoch;
      if (task_n) rec.task_loss = task_sum / static_cast<double>(task_n);
      if (dist_n) rec.distance_loss = dist_sum / static_cast<double>(dist_n);
      if (teacher_n) rec.teacher_loss = teacher_sum / static_cast<double>(teacher_n);
      evaluate_into(rec);
      result.history.push_back(rec);
      if (rec.valid_score > best_score) {
        best_score = rec.valid_score;
        result.best = models;
        result.best_epoch = epoch;
      }
      result.last_epoch = epoch;
      result.epoch_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      if (on_epoch) on_epoch(epoch, models, result.history);
    }
  }
  result.last = models;
  result.test = evaluate_rows(result.best, inputs, targets, result.labels, test_rows);
  return result;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

}  // namespace

ExperimentResult train_experiment(const TrainConfig& config, const ExperimentData& data) {
  return train_impl(config, data, nullptr);
}

nlohmann::json history_to_json(const std::vector<EpochRecord>& history) {
  nlohmann::json arr = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  for (const auto& r : history) {
    nlohmann::json j;
    j["epoch"] = r.epoch;
    j["task_loss"] = opt(r.task_loss);
    j["distance_loss"] = opt(r.distance_loss);
    j["teacher_loss"] = opt(r.teacher_loss);
    j["valid"] = r.valid.to_json();
    j["valid_score"] = r.valid_score;
    arr.push_back(j);
  }
  return arr;
}

ExperimentResult run_experiment(const TrainConfig& config) {
  config.validate();
  if (config.output_dir.empty()) throw ValidationError("config needs an output_dir");
  if (config.manifest.empty()) throw ValidationError("config needs a manifest");
  ExperimentData data;
  if (config.regime != Regime::teacher_lr) {
    if (config.student_store.empty()) throw ValidationError("config needs a student_store");
    data.student_input = read_store(config.student_store).matrix;
  }
  if (config.regime != Regime::baseline) {
    if (config.teacher_store.empty()) throw ValidationError("config needs a teacher_store");
    data.teacher = read_store(config.teacher_store).matrix;
  }
  const std::uint64_t n_rows = config.regime != Regime::teacher_lr ? data.student_input.rows()
                                                                    : data.teacher.rows();
  data.manifest = Manifest::load(config.manifest, n_rows);

  const std::filesystem::path out = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create '" + out.string() + "': " + ec.message());

  LabelSpace labels = LabelSpace::from_manifest(data.manifest, config.task_kind);
  // Keep the last completed epoch on disk so a numeric abort leaves a usable checkpoint.
  auto on_epoch = [&](std::size_t epoch, const Models& current, const std::vector<EpochRecord>& history) {
    Checkpoint ck{config, epoch, labels, current, history_to_json(history), std::nullopt};
    save_checkpoint(out / "ckpt_last.bin", ck);
  };
  ExperimentResult result = train_impl(config, data, on_epoch);

  const auto history = history_to_json(result.history);
  save_checkpoint(out / "ckpt_best.bin",
                  Checkpoint{config, result.best_epoch, result.labels, result.best, history, result.test});
  save_checkpoint(out / "ckpt_last.bin",
                  Checkpoint{config, result.last_epoch, result.labels, result.last, history, std::nullopt});

  nlohmann::json report;
  report["config"] = config.to_json();
  report["label_space"] = result.labels.names;
  report["best_epoch"] = result.best_epoch;
  report["last_epoch"] = result.last_epoch;
  report["history"] = history;
  for (const auto& r : result.history) {
    if (r.epoch == result.best_epoch) report["valid"] = r.valid.to_json();
  }
  report["test"] = result.test.to_json();
  write_text(out / "report.json", report.dump(2) + "\n");

  nlohmann::json timing;
  timing["epoch_seconds"] = result.epoch_seconds;
  write_text(out / "timing.json", timing.dump(2) + "\n");
  return result;
}

MetricReport evaluate_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& store,
                                 const std::filesystem::path& manifest_path, Split split,
                                 const std::optional<NameMap>& name_map) {
  const auto s = read_store(store);
  Models models = ckpt.models;
  if (s.matrix.cols() != models.input_dim()) {
    throw ValidationError("checkpoint expects input dimension " + std::to_string(models.input_dim()) +
                          " but store '" + store.string() + "' has dimension " +
                          std::to_string(s.matrix.cols()));
  }
  const Manifest manifest = Manifest::load(manifest_path, s.matrix.rows());
  const auto rows = manifest.rows(split);
  if (rows.empty()) throw ValidationError(std::string("split '") + to_string(split) + "' is empty");
  if (!name_map) {
    const Targets targets = targets_by_row(manifest, ckpt.labels, s.matrix.rows());
    return evaluate_rows(models, s.matrix, targets, ckpt.labels, rows);
  }
  const LabelSpace eval_space = LabelSpace::from_manifest(manifest, ckpt.labels.kind);
  const Targets targets = targets_by_row(manifest, eval_space, s.matrix.rows()).gather(rows);
  const Tensor scores = predict(models, s.matrix.gather_rows(rows));
  return overlap_eval(scores, ckpt.labels, label_matrix(targets, eval_space.size()), eval_space, *name_map);
}

}  // namespace east

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


// Runs the acceptance criteria A1..A9 and prints one PASS/FAIL line each.
// Usage: east_acceptance [A1 A5 ...]   (no arguments runs all)

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "east/compression.hpp"
#include "east/error.hpp"
#include "east/kernels.hpp"
#include "east/losses.hpp"
#include "east/metrics.hpp"
#include "east/store.hpp"
#include "east/student.hpp"
#include "east/synthetic.hpp"
#include "east/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace east;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kA1RelTol = 1e-10;
constexpr double kA2InvarianceTol = 1e-9;
constexpr double kA2SymmetryTol = 1e-12;
constexpr double kA2SelfTol = 1e-9;
constexpr double kA3RelTol = 1e-4;
constexpr double kA7Tol = 1e-12;
constexpr int kA1Cases = 200;
constexpr int kTrials = 100;
constexpr int kGradSeeds = 20;
constexpr int kRunSeeds = 5;
constexpr int kMinWins = 4;
constexpr double kA1Budget = 10, kA2Budget = 10, kA3Budget = 60, kA4Budget = 5, kA5Budget = 600,
                 kA6Budget = 600, kA7Budget = 5, kA8Budget = 5, kA9Budget = 120;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the first few are reported.
struct Checker {
  Outcome out;
  int failures = 0;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    out.pass = false;
    if (++failures <= 3) out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

using testutil::bit_equal;
using testutil::random_tensor;

Outcome a1() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(2, 32), dim(1, 16);
  Checker c;
  double worst = 0.0;
  for (int i = 0; i < kA1Cases; ++i) {
    const std::size_t n = n_dist(rng), p = dim(rng), q = dim(rng);
    const auto x = oracle::random_matrix(rng, n, p, 3.0);
    const auto y = oracle::random_matrix(rng, n, q, 3.0);
    const double want = oracle::dcor(x, y);
    Tape tape;
    const Tensor tx = testutil::to_tensor(x), ty = testutil::to_tensor(y);
    const double got = dcor(tape.input(tx), tape.input(ty)).value().item();
    const double streamed = dcor_value(tx, ty);
    const double err = std::max(rel(got, want), rel(streamed, want));
    worst = std::max(worst, err);
    c.expect(err < kA1RelTol, "case " + std::to_string(i) + " rel " + fmt("%.3g", err));
  }
  if (c.out.pass) c.out.detail = std::to_string(kA1Cases) + " cases, worst rel " + fmt("%.2g", worst);
  return c.out;
}

double dcor_of(const Tensor& x, const Tensor& y) {
  Tape tape;
  return dcor(tape.input(x), tape.input(y)).value().item();
}

Outcome a2() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-5.0, 5.0), pos(0.1, 10.0);
  Checker c;
  double worst_inv = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 4 + t % 29, p = 1 + t % 7, q = 1 + (t * 3) % 11;
    const Tensor x = random_tensor(rng, n, p), y = random_tensor(rng, n, q);
    const double base = dcor_of(x, y);

    Tensor scaled = x;
    const double s = pos(rng);
    for (auto& v : scaled.data()) v *= s;
    const Tensor rotated = kernels::serial::matmul(y, random_orthogonal(q, 1000 + t));
    Tensor shifted = x;
    for (std::size_t j = 0; j < p; ++j) {
      const double shift = u(rng);
      for (std::size_t i = 0; i < n; ++i) shifted(i, j) += shift;
    }
    for (const double v : {dcor_of(scaled, y), dcor_of(x, rotated), dcor_of(shifted, y)}) {
      worst_inv = std::max(worst_inv, std::abs(v - base));
      c.expect(std::abs(v - base) < kA2InvarianceTol, "invariance trial " + std::to_string(t));
    }
    c.expect(std::abs(dcor_of(y, x) - base) < kA2SymmetryTol, "symmetry trial " + std::to_string(t));
    c.expect(base >= 0.0 && base <= 1.0, "range trial " + std::to_string(t));
    c.expect(dcor_of(Tensor(n, p, u(rng)), y) == 0.0, "constant trial " + std::to_string(t));
    c.expect(std::abs(dcor_of(x, x) - 1.0) < kA2SelfTol, "self trial " + std::to_string(t));
  }
  if (c.out.pass) c.out.detail = std::to_string(kTrials) + " trials, worst invariance dev " + fmt("%.2g", worst_inv);
  return c.out;
}

// Full east_dc_linear objective on one batch. The distance target is
// detached, so the transform and head only see L_teacher.
struct Composite {
  StudentModel student;
  CompressionModule compression;
  Tensor x, t;
  Targets y;
  double lambda = 1.0;

  Var objective(Tape& tape, bool with_distance = true) {
    auto out = student.forward(tape, tape.input(x));
    Var teacher = tape.input(t);
    Var compact = compress(compression, teacher);
    Var total = ad::add(task_loss(out.logits, y), teacher_loss(compression, compact, y));
    if (with_distance) total = ad::add(total, ad::scale(dcor_loss(out.embedding, ad::stop_gradient(compact)), lambda));
    return total;
  }
};

Outcome a3() {
  Checker c;
  double worst = 0.0;
  auto check = [&](double err, const std::string& what) {
    worst = std::max(worst, err);
    c.expect(err < kA3RelTol, what + " rel " + fmt("%.3g", err));
  };
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    std::mt19937_64 rng(9000 + seed);
    std::bernoulli_distribution coin(0.5);
    const Tensor s = random_tensor(rng, 8, 3), t = random_tensor(rng, 8, 6);
    Tensor bin(8, 6);
    for (auto& v : bin.data()) v = coin(rng) ? 1.0 : 0.0;
    const std::vector<std::size_t> cls{0, 5, 2, 1, 3, 0, 4, 4};
    const std::string tag = " seed " + std::to_string(seed);
    check(testutil::input_grad_error([&](Tape& tape, Var v) { return dcor_loss(v, tape.input(t)); }, s), "dcor_loss" + tag);
    auto proj = FitNetProjection::make(3, 6, rng);
    check(testutil::input_grad_error([&](Tape& tape, Var v) { return fitnet_loss(v, tape.input(t), proj); }, s),
          "fitnet_loss" + tag);
    check(testutil::param_grad_error([&](Tape& tape) { return fitnet_loss(tape.input(s), tape.input(t), proj); },
                                     proj.weight),
          "fitnet_loss projection" + tag);
    check(testutil::input_grad_error([&](Tape&, Var v) { return bce_with_logits(v, bin); }, t), "bce_with_logits" + tag);
    check(testutil::input_grad_error([&](Tape&, Var v) { return cross_entropy(v, cls); }, t), "cross_entropy" + tag);

    StudentConfig sc;
    sc.input_dim = 5;
    sc.widths = {7, 4};
    sc.n_classes = 3;
    Composite comp{StudentModel::make(sc, rng), CompressionModule::make(6, 4, 3, rng), random_tensor(rng, 10, 5),
                   random_tensor(rng, 10, 6), Targets{}, 1.0};
    Tensor yb(10, 3);
    for (auto& v : yb.data()) v = coin(rng) ? 1.0 : 0.0;
    comp.y = Targets::multilabel(yb);
    for (Parameter* p : comp.student.parameters()) {
      check(testutil::param_grad_error([&](Tape& tape) { return comp.objective(tape); }, *p, TagSet{ParamTag::student}),
            "composite " + p->name + tag);
    }
    // Teacher-side gradients come from L_teacher alone.
    for (Parameter* p : comp.compression.parameters()) {
      check(testutil::param_grad_error([&](Tape& tape) { return comp.objective(tape, false); }, *p, kTeacherLossGate),
            "composite " + p->name + tag);
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(kGradSeeds) + " seeds, worst rel " + fmt("%.2g", worst);
  return c.out;
}

std::vector<Tensor> tagged_values(Models& m, TagSet tags) {
  std::vector<Tensor> out;
  for (auto* p : m.parameters())
    if (tags.contains(p->tag)) out.push_back(p->value);
  return out;
}

bool all_bit_equal(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!bit_equal(a[i], b[i])) return false;
  return true;
}

Outcome a4() {
  SyntheticSpec spec;
  spec.n = 400;
  spec.seed = 5;
  const auto d = generate_synthetic(spec);
  const auto rows = d.manifest.rows(Split::train);
  Checker c;
  for (Regime regime : {Regime::east_dc_linear, Regime::east_fitnet_linear}) {
    TrainConfig cfg;  // defaults
    cfg.regime = regime;
    const std::vector<std::size_t> batch(rows.begin(), rows.begin() + cfg.batch_size);
    const Tensor x = d.student_input.gather_rows(batch), t = d.teacher.gather_rows(batch);
    const Targets y = Targets::multilabel(d.tags.gather_rows(batch));
    auto fresh = [&] {
      std::mt19937_64 rng(cfg.seed);
      return Models::make(cfg, x.cols(), t.cols(), d.tags.cols(), rng);
    };
    const std::string name = to_string(regime);

    Models teacher_only = fresh();
    const auto student0 = tagged_values(teacher_only, {ParamTag::student});
    const auto teacher0 = tagged_values(teacher_only, kTeacherLossGate);
    train_step(teacher_only, cfg, x, t, y, 0, StepToggles{false, false, true});
    c.expect(all_bit_equal(tagged_values(teacher_only, {ParamTag::student}), student0),
             name + ": L_teacher step moved a student parameter");
    c.expect(!all_bit_equal(tagged_values(teacher_only, kTeacherLossGate), teacher0),
             name + ": L_teacher step did not move the teacher side");

    Models distance_only = fresh();
    train_step(distance_only, cfg, x, t, y, 0, StepToggles{false, true, false});
    c.expect(all_bit_equal(tagged_values(distance_only, kTeacherLossGate), teacher0),
             name + ": distance step moved a teacher parameter");
    c.expect(!all_bit_equal(tagged_values(distance_only, {ParamTag::student}), student0),
             name + ": distance step did not move the student");
  }
  if (c.out.pass) c.out.detail = "east_dc_linear and east_fitnet_linear, exact equality";
  return c.out;
}

SyntheticSpec a5_spec(std::size_t irrelevant, std::uint64_t seed) {
  SyntheticSpec s;
  s.n = 2000;
  s.latent_dim = 8;
  s.n_tags = 4;
  s.teacher_dim = 64;
  s.irrelevant_dims = irrelevant;
  s.student_input_dim = 16;
  s.noise_std = 0.5;
  s.seed = seed;
  return s;
}

ExperimentResult train_on(const SyntheticData& d, Regime regime, std::uint64_t seed) {
  TrainConfig cfg;  // default hyperparameters
  cfg.regime = regime;
  cfg.seed = seed;
  return train_experiment(cfg, ExperimentData{d.teacher, d.student_input, d.manifest});
}

struct PairGap {
  double mean = 0.0;
  int wins = 0;
};

Outcome a5() {
  const std::pair<Regime, Regime> pairs[] = {{Regime::east_dc_linear, Regime::east_dc},
                                             {Regime::east_fitnet_linear, Regime::east_fitnet}};
  PairGap gaps[2][2];  // [r index][pair]
  const std::size_t rs[] = {48, 0};
  for (int ri = 0; ri < 2; ++ri) {
    for (int s = 0; s < kRunSeeds; ++s) {
      const auto d = generate_synthetic(a5_spec(rs[ri], 100 + s));
      for (int k = 0; k < 2; ++k) {
        const double lin = *train_on(d, pairs[k].first, s).test.accuracy;
        const double plain = *train_on(d, pairs[k].second, s).test.accuracy;
        gaps[ri][k].mean += (lin - plain) / kRunSeeds;
        gaps[ri][k].wins += lin >= plain;
      }
    }
  }
  Checker c;
  std::ostringstream detail;
  for (int k = 0; k < 2; ++k) {
    const std::string name = k == 0 ? "dc" : "fitnet";
    detail << (k ? "; " : "") << name << " gap r=48 " << fmt("%+.4f", gaps[0][k].mean) << " (" << gaps[0][k].wins
           << "/5) r=0 " << fmt("%+.4f", gaps[1][k].mean);
    c.expect(gaps[0][k].mean >= 0.0, name);
    c.expect(gaps[0][k].wins >= kMinWins, name);
    c.expect(gaps[0][k].mean > gaps[1][k].mean, name);
  }
  c.out.detail = detail.str();
  return c.out;
}

Outcome a6() {
  const NameMap shared{{"tag0", "tag0"}, {"tag1", "tag1"}, {"tag2", "tag2"}};
  int wins = 0;
  std::ostringstream detail;
  for (int s = 0; s < kRunSeeds; ++s) {
    const auto a = generate_synthetic(a5_spec(48, 200 + s));
    auto b_spec = a5_spec(48, 300 + s);
    b_spec.structure_seed = 200 + s;
    b_spec.nuisance_shift = 1.0;
    b_spec.redraw_tags = {3};
    const auto b = generate_synthetic(b_spec);
    const auto b_space = LabelSpace::from_manifest(b.manifest, TaskKind::multilabel);
    const auto rows = b.manifest.rows(Split::test);
    const Tensor b_inputs = b.student_input.gather_rows(rows), b_tags = b.tags.gather_rows(rows);
    double map[2];
    const Regime regimes[] = {Regime::east_dc, Regime::baseline};
    for (int k = 0; k < 2; ++k) {
      auto r = train_on(a, regimes[k], s);
      map[k] = overlap_eval(predict(r.best, b_inputs), r.labels, b_tags, b_space, shared).map;
    }
    wins += map[0] >= map[1];
    detail << (s ? " " : "") << fmt("%+.4f", map[0] - map[1]);
  }
  return {wins >= kMinWins, "east_dc - baseline mAP on B: " + detail.str() + " (" + std::to_string(wins) + "/5)"};
}

Outcome a7() {
  Checker c;
  const std::vector<double> s3{0.9, 0.8, 0.7};
  const std::vector<double> l3{1, 0, 1};
  const auto ap = average_precision(s3, l3);
  c.expect(ap && std::abs(*ap - 5.0 / 6.0) < kA7Tol, "5/6 example");
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 60), tiny(0, 4);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = size(rng);
    std::vector<double> scores(n), labels(n);
    std::vector<int> ilabels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = t % 2 ? tiny(rng) : std::uniform_real_distribution<double>(-1, 1)(rng);  // odd trials have ties
      ilabels[i] = coin(rng);
      labels[i] = ilabels[i];
    }
    const double want = oracle::average_precision(scores, ilabels);
    const auto got = average_precision(scores, labels);
    if (want < 0) {
      c.expect(!got.has_value(), "trial " + std::to_string(t) + " should skip");
    } else {
      c.expect(got && std::abs(*got - want) < kA7Tol, "trial " + std::to_string(t));
    }
  }
  const std::vector<std::size_t> label0{0};
  c.expect(accuracy(Tensor(1, 3, 0.0), label0) == 1.0, "tie rule");
  const std::vector<std::size_t> label1{1};
  c.expect(accuracy(Tensor(1, 3, 0.0), label1) == 0.0, "tie rule, other class");
  if (c.out.pass) c.out.detail = "5/6 example, " + std::to_string(kTrials) + " oracle instances, tie rule";
  return c.out;
}

StoreFormatError::Code code_of(const std::vector<std::uint8_t>& bytes, std::string* msg = nullptr) {
  try {
    decode_store(bytes);
  } catch (const StoreFormatError& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  throw std::runtime_error("corrupted store was accepted");
}

Outcome a8() {
  using Code = StoreFormatError::Code;
  Checker c;
  const auto one = encode_store(Tensor(1, 1, 1.0), StoreDtype::float32);
  c.expect(one.size() == 24 && one[20] == 0x00 && one[21] == 0x00 && one[22] == 0x80 && one[23] == 0x3F,
           "1x1 f32 layout");
  std::mt19937_64 rng(8);
  const Tensor m75 = random_tensor(rng, 7, 5, 100.0);
  const auto dir = fs::temp_directory_path() / "east_acceptance_a8";
  fs::create_directories(dir);
  write_store(dir / "m.east", m75, StoreDtype::float64);
  c.expect(bit_equal(read_store(dir / "m.east").matrix, m75), "7x5 f64 file round trip");
  const auto bytes = read_file_bytes(dir / "m.east");
  const std::uint8_t prefix[] = {0x45, 0x41, 0x53, 0x54, 0x01, 0x00};
  c.expect(std::memcmp(bytes.data(), prefix, 6) == 0 && std::memcmp(one.data(), prefix, 6) == 0, "header prefix");

  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 9, d = 1 + (t * 7) % 13;
    const Tensor m = random_tensor(rng, n, d, 10.0);
    c.expect(bit_equal(decode_store(encode_store(m, StoreDtype::float64)).matrix, m), "f64 round trip");
    Tensor f = m;
    for (auto& v : f.data()) v = static_cast<float>(v);
    c.expect(bit_equal(decode_store(encode_store(f, StoreDtype::float32)).matrix, f), "f32 round trip");
  }

  std::string msg;
  auto bad = bytes;
  bad[3] = 'X';
  c.expect(code_of(bad, &msg) == Code::bad_magic && msg.find("offset 0") != std::string::npos, "bad magic");
  bad = bytes;
  bad.resize(bad.size() - 4);
  const std::string expect_len = std::to_string(bytes.size()), actual_len = std::to_string(bad.size());
  c.expect(code_of(bad, &msg) == Code::bad_length && msg.find(expect_len) != std::string::npos &&
               msg.find(actual_len) != std::string::npos,
           "short file");
  bad = bytes;
  bad[4] = 9;
  c.expect(code_of(bad) == Code::bad_version, "unknown version");
  bad = bytes;
  bad[6] = 3;
  c.expect(code_of(bad) == Code::bad_dtype, "unknown dtype");
  c.expect(code_of(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)) == Code::truncated_header,
           "truncated header");
  fs::remove_all(dir);
  if (c.out.pass) c.out.detail = "layout examples, round trips, error taxonomy";
  return c.out;
}

int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome a9() {
  const auto dir = fs::temp_directory_path() / "east_acceptance_a9";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = EAST_CLI_PATH;
  std::ofstream(dir / "spec.json") << R"({"n": 600, "seed": 3})";
  if (run_command(cli + " synth --spec " + (dir / "spec.json").string() + " --out " + (dir / "data").string()) != 0)
    return {false, "synth failed"};
  const char* files[] = {"report.json", "ckpt_best.bin", "ckpt_last.bin"};
  std::vector<std::string> runs[2];
  for (int k = 0; k < 2; ++k) {
    std::ofstream(dir / "cfg.json") << R"({"regime": "east_dc_linear", "epochs": 5, "seed": 11,
      "teacher_store": "data/teacher.east", "student_store": "data/student_input.east",
      "manifest": "data/manifest.csv", "output_dir": "out"})";
    fs::remove_all(dir / "out");
    if (run_command(cli + " train --config " + (dir / "cfg.json").string()) != 0) return {false, "train failed"};
    for (const char* f : files) runs[k].push_back(slurp(dir / "out" / f));
  }
  Checker c;
  for (int i = 0; i < 3; ++i) c.expect(runs[0][i] == runs[1][i] && !runs[0][i].empty(), std::string(files[i]) + " differs");
  fs::remove_all(dir);
  if (c.out.pass) c.out.detail = "report.json and both checkpoints byte-identical";
  return c.out;
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"A1", "dcor matches brute-force oracle", kA1Budget, a1},
      {"A2", "dcor invariances", kA2Budget, a2},
      {"A3", "gradient checks", kA3Budget, a3},
      {"A4", "gradient gating", kA4Budget, a4},
      {"A5", "irrelevant teacher dims hurt plain transfer", kA5Budget, a5},
      {"A6", "overlap evaluation on shifted dataset", kA6Budget, a6},
      {"A7", "metric oracles", kA7Budget, a7},
      {"A8", "store format contract", kA8Budget, a8},
      {"A9", "determinism of east train", kA9Budget, a9},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += " [over budget " + fmt("%.0f", c.budget_s) + " s]";
    }
    failed += !o.pass;
    std::printf("%s %s  %s: %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

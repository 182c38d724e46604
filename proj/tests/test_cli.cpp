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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run east(const std::string& args) {
  const std::string cmd = std::string(EAST_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path workdir(const std::string& name) {
  auto p = fs::path(::testing::TempDir()) / ("east_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Small synthetic dataset in <dir>/data.
void synth(const fs::path& dir) {
  write_text(dir / "spec.json", R"({"n": 300, "seed": 4})");
  const auto r = east("synth --spec " + (dir / "spec.json").string() + " --out " + (dir / "data").string());
  ASSERT_EQ(r.code, 0) << r.out;
}

void write_config(const fs::path& dir, const std::string& extra) {
  write_text(dir / "cfg.json", R"({"regime": "east_dc_linear", "epochs": 2, "batch_size": 32,
    "student_widths": [16, 8], "seed": 1,
    "teacher_store": "data/teacher.east", "student_store": "data/student_input.east",
    "manifest": "data/manifest.csv", "output_dir": "out")" + extra + "}");
}

}  // namespace

TEST(Cli, Version) {
  const auto r = east("version");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "east 0.1.0\n");
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(east("").code, 1);
  EXPECT_EQ(east("frobnicate").code, 1);
  EXPECT_EQ(east("dcor --a only_one").code, 1);
  EXPECT_EQ(east("--help").code, 0);
}

TEST(Cli, SynthTrainEval) {
  const auto dir = workdir("flow");
  synth(dir);
  for (const char* f : {"teacher.east", "student_input.east", "manifest.csv"}) EXPECT_TRUE(fs::exists(dir / "data" / f)) << f;
  write_config(dir, "");
  const auto train = east("train --config " + (dir / "cfg.json").string());
  ASSERT_EQ(train.code, 0) << train.out;
  const auto summary = nlohmann::json::parse(train.out);
  EXPECT_EQ(summary.at("regime"), "east_dc_linear");
  EXPECT_EQ(summary.at("last_epoch"), 2);
  for (const char* f : {"ckpt_best.bin", "ckpt_last.bin", "report.json", "timing.json"}) EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;

  const auto eval = east("eval --ckpt " + (dir / "out" / "ckpt_best.bin").string() + " --manifest " +
                         (dir / "data" / "manifest.csv").string() + " --store " + (dir / "data" / "student_input.east").string());
  ASSERT_EQ(eval.code, 0) << eval.out;
  EXPECT_EQ(nlohmann::json::parse(eval.out), summary.at("test"));

  write_text(dir / "map.csv", "model_label,eval_label\ntag1,tag1\n");
  const auto mapped = east("eval --ckpt " + (dir / "out" / "ckpt_best.bin").string() + " --manifest " +
                           (dir / "data" / "manifest.csv").string() + " --store " +
                           (dir / "data" / "student_input.east").string() + " --name-map " + (dir / "map.csv").string());
  ASSERT_EQ(mapped.code, 0) << mapped.out;
  EXPECT_EQ(nlohmann::json::parse(mapped.out).at("per_class_ap").size(), 1u);

  const auto wrong = east("eval --ckpt " + (dir / "out" / "ckpt_best.bin").string() + " --manifest " +
                          (dir / "data" / "manifest.csv").string() + " --store " + (dir / "data" / "teacher.east").string());
  EXPECT_EQ(wrong.code, 1);
  EXPECT_NE(wrong.out.find("dimension"), std::string::npos) << wrong.out;
}

TEST(Cli, TrainTwiceIsByteIdentical) {
  const auto dir = workdir("repro");
  synth(dir);
  write_config(dir, "");
  ASSERT_EQ(east("train --config " + (dir / "cfg.json").string()).code, 0);
  const auto report = slurp(dir / "out" / "report.json");
  const auto best = slurp(dir / "out" / "ckpt_best.bin");
  fs::remove_all(dir / "out");
  ASSERT_EQ(east("train --config " + (dir / "cfg.json").string()).code, 0);
  EXPECT_EQ(slurp(dir / "out" / "report.json"), report);
  EXPECT_EQ(slurp(dir / "out" / "ckpt_best.bin"), best);
}

TEST(Cli, Dcor) {
  const auto dir = workdir("dcor");
  synth(dir);
  const auto t = (dir / "data" / "teacher.east").string();
  const auto s = (dir / "data" / "student_input.east").string();
  const auto self = east("dcor --a " + t + " --b " + t);
  ASSERT_EQ(self.code, 0) << self.out;
  EXPECT_DOUBLE_EQ(std::stod(self.out), 1.0);
  const auto cross = east("dcor --a " + t + " --b " + s);
  ASSERT_EQ(cross.code, 0) << cross.out;
  const double v = std::stod(cross.out);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  EXPECT_EQ(east("dcor --a " + t + " --b " + (dir / "nope.east").string()).code, 1);
}

TEST(Cli, ValidationErrorsExitOne) {
  const auto dir = workdir("invalid");
  synth(dir);
  write_config(dir, R"(, "lambda_distill": -1)");
  auto r = east("train --config " + (dir / "cfg.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("lambda_distill"), std::string::npos) << r.out;
  write_config(dir, R"(, "learning_rate": 0.1)");
  EXPECT_EQ(east("train --config " + (dir / "cfg.json").string()).code, 1);
  write_text(dir / "data" / "teacher.east", "EAST");
  write_config(dir, "");
  r = east("train --config " + (dir / "cfg.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("teacher.east"), std::string::npos) << r.out;
}

TEST(Cli, DivergenceExitsTwo) {
  const auto dir = workdir("diverge");
  synth(dir);
  write_config(dir, R"(, "regime": "baseline", "lr": 40.0, "epochs": 50)");
  const auto r = east("train --config " + (dir / "cfg.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "ckpt_last.bin"));
}

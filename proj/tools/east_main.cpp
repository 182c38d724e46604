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


// east: command-line front end.
//
//   east train --config cfg.json
//   east eval  --ckpt ckpt_best.bin --manifest m.csv --store x.east [--name-map map.csv] --split test
//   east synth --spec spec.json --out dir
//   east dcor  --a a.east --b b.east
//   east version
//
// Exit status: 0 ok, 1 validation or I/O error, 2 numeric abort.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "east/error.hpp"
#include "east/losses.hpp"
#include "east/manifest.hpp"
#include "east/store.hpp"
#include "east/synthetic.hpp"
#include "east/trainer.hpp"

#ifndef EAST_VERSION
#define EAST_VERSION "0.0.0"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

int cmd_train(const std::string& config_path) {
  const auto config = east::load_train_config(config_path);
  const auto result = east::run_experiment(config);
  nlohmann::json summary = {
      {"regime", east::to_string(config.regime)},
      {"best_epoch", result.best_epoch},
      {"last_epoch", result.last_epoch},
      {"test", result.test.to_json()},
      {"output_dir", config.output_dir},
  };
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt, const std::string& manifest, const std::string& store,
             const std::string& name_map, const std::string& split) {
  const auto checkpoint = east::load_checkpoint(ckpt);
  std::optional<east::NameMap> map;
  if (!name_map.empty()) map = east::load_name_map(name_map);
  const auto report =
      east::evaluate_checkpoint(checkpoint, store, manifest, east::split_from_string(split), map);
  std::cout << report.to_json().dump(2) << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  const auto spec = east::load_synthetic_spec(spec_path);
  const auto data = east::generate_synthetic(spec);
  east::write_synthetic(data, out, spec.dtype);
  std::cout << "wrote " << (std::filesystem::path(out) / "teacher.east").string() << ", "
            << (std::filesystem::path(out) / "student_input.east").string() << ", "
            << (std::filesystem::path(out) / "manifest.csv").string() << "\n";
  return kExitOk;
}

int cmd_dcor(const std::string& a, const std::string& b) {
  const auto sa = east::read_store(a);
  const auto sb = east::read_store(b);
  const double v = east::dcor_value(sa.matrix, sb.matrix);
  std::printf("%.17g\n", v);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EAsT: train students with teacher embeddings"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "Train one experiment from a JSON config");
  train->add_option("--config", config_path, "Config file")->required();

  std::string ckpt, manifest, store, name_map, split = "test";
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a store/manifest split");
  eval->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval->add_option("--manifest", manifest, "Manifest CSV")->required();
  eval->add_option("--store", store, "Input store for the checkpoint's model")->required();
  eval->add_option("--name-map", name_map, "model_label,eval_label CSV for overlap evaluation");
  eval->add_option("--split", split, "train, valid or test")->capture_default_str();

  std::string spec_path, out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
  synth->add_option("--out", out, "Output directory")->required();

  std::string store_a, store_b;
  auto* dcor = app.add_subcommand("dcor", "Distance correlation of two aligned stores");
  dcor->add_option("--a", store_a, "First store")->required();
  dcor->add_option("--b", store_b, "Second store")->required();

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*train) return cmd_train(config_path);
    if (*eval) return cmd_eval(ckpt, manifest, store, name_map, split);
    if (*synth) return cmd_synth(spec_path, out);
    if (*dcor) return cmd_dcor(store_a, store_b);
    if (*version) {
      std::cout << "east " << EAST_VERSION << "\n";
      return kExitOk;
    }
  } catch (const east::NumericError& e) {
    std::cerr << "east: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "east: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

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

// Checkpoint layout (little-endian):
//
//   "EACK" | u16 version = 1 | u16 reserved = 0 | u64 meta_bytes | meta JSON
//   | u64 value_count | value_count f64 parameter values
//
// The JSON carries the config echo, label space, history, optional test
// report and the list of parameters (name, tag, shape) in the order their
// values follow.

#include <bit>
#include <cstring>
#include <string_view>

#include "east/error.hpp"
#include "east/store.hpp"
#include "east/trainer.hpp"

namespace east {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view text(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError(name_ + ": truncated checkpoint (needed " + std::to_string(n) +
                            " bytes at offset " + std::to_string(pos_) + ")");
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

ParamTag tag_from_string(const std::string& s) {
  for (ParamTag t : {ParamTag::student, ParamTag::teacher_transform, ParamTag::teacher_head}) {
    if (s == to_string(t)) return t;
  }
  throw ValidationError("unknown parameter tag '" + s + "'");
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Models models = ckpt.models;
  nlohmann::json meta;
  meta["config"] = ckpt.config.to_json();
  meta["epoch"] = ckpt.epoch;
  meta["labels"] = {{"kind", to_string(ckpt.labels.kind)}, {"names", ckpt.labels.names}};
  meta["history"] = ckpt.history;
  meta["test"] = ckpt.test ? ckpt.test->to_json() : nlohmann::json(nullptr);

  nlohmann::json arch;
  arch["regime"] = to_string(models.regime);
  if (models.student) {
    std::vector<std::string> acts;
    for (const auto& l : models.student->layers()) acts.emplace_back(to_string(l.activation));
    arch["student_activations"] = acts;
  } else {
    arch["student_activations"] = nullptr;
  }
  arch["projection"] = models.projection.enabled;
  arch["compression"] = models.compression.has_value();
  arch["probe"] = models.probe.has_value();
  meta["models"] = arch;

  nlohmann::json plist = nlohmann::json::array();
  std::size_t count = 0;
  const auto params = models.parameters();
  for (const Parameter* p : params) {
    plist.push_back({{"name", p->name},
                     {"tag", to_string(p->tag)},
                     {"rows", p->value.rows()},
                     {"cols", p->value.cols()}});
    count += p->value.size();
  }
  meta["params"] = plist;

  const std::string text = meta.dump();
  std::vector<std::uint8_t> out;
  out.reserve(24 + text.size() + count * 8);
  for (char ch : std::string_view("EACK")) out.push_back(static_cast<std::uint8_t>(ch));
  put_le(out, kCheckpointVersion, 2);
  put_le(out, 0, 2);
  put_le(out, text.size(), 8);
  out.insert(out.end(), text.begin(), text.end());
  put_le(out, count, 8);
  for (const Parameter* p : params) {
    for (double v : p->value.data()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& name) {
  Reader rd(bytes, name);
  if (rd.text(4) != "EACK") throw ValidationError(name + ": not an EAsT checkpoint (bad magic)");
  const auto version = rd.le(2);
  if (version != kCheckpointVersion) {
    throw ValidationError(name + ": unsupported checkpoint version " + std::to_string(version));
  }
  rd.le(2);
  const auto meta_len = rd.le(8);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(rd.text(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(name + ": corrupt checkpoint metadata: " + e.what());
  }

  Checkpoint ck;
  try {
    ck.config = TrainConfig::from_json(meta.at("config"));
    ck.epoch = meta.at("epoch").get<std::size_t>();
    ck.labels.kind = task_kind_from_string(meta.at("labels").at("kind").get<std::string>());
    ck.labels.names = meta.at("labels").at("names").get<std::vector<std::string>>();
    ck.history = meta.at("history");
    if (!meta.at("test").is_null()) ck.test = MetricReport::from_json(meta.at("test"));

    const std::size_t count = rd.le(8);
    std::vector<Parameter> params;
    std::size_t consumed = 0;
    for (const auto& pj : meta.at("params")) {
      const auto rows = pj.at("rows").get<std::size_t>();
      const auto cols = pj.at("cols").get<std::size_t>();
      consumed += rows * cols;
      if (consumed > count) throw ValidationError(name + ": parameter payload shorter than declared");
      std::vector<double> values(rows * cols);
      for (double& v : values) v = std::bit_cast<double>(rd.le(8));
      params.emplace_back(pj.at("name").get<std::string>(), Tensor(rows, cols, std::move(values)),
                          tag_from_string(pj.at("tag").get<std::string>()));
    }
    if (consumed != count || !rd.at_end()) {
      throw ValidationError(name + ": parameter payload length does not match the metadata");
    }

    const auto& arch = meta.at("models");
    Models& m = ck.models;
    m.regime = regime_from_string(arch.at("regime").get<std::string>());
    std::size_t next = 0;
    auto take = [&]() -> Parameter {
      if (next >= params.size()) throw ValidationError(name + ": missing parameters");
      return std::move(params[next++]);
    };
    if (!arch.at("student_activations").is_null()) {
      std::vector<DenseLayer> layers;
      for (const auto& a : arch.at("student_activations")) {
        Parameter w = take();
        Parameter b = take();
        layers.push_back(DenseLayer{std::move(w), std::move(b), activation_from_string(a.get<std::string>())});
      }
      Parameter hw = take();
      Parameter hb = take();
      m.student = StudentModel(std::move(layers), DenseLayer{std::move(hw), std::move(hb), Activation::none});
    }
    if (arch.at("projection").get<bool>()) {
      m.projection.weight = take();
      m.projection.bias = take();
      m.projection.enabled = true;
    }
    if (arch.at("compression").get<bool>()) {
      CompressionModule c;
      c.transform_weight = take();
      c.transform_bias = take();
      c.head_weight = take();
      c.head_bias = take();
      m.compression = std::move(c);
    }
    if (arch.at("probe").get<bool>()) {
      Parameter w = take();
      Parameter b = take();
      m.probe = DenseLayer{std::move(w), std::move(b), Activation::none};
    }
    if (next != params.size()) throw ValidationError(name + ": unexpected extra parameters");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(name + ": corrupt checkpoint metadata: " + e.what());
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_checkpoint(bytes, path.string());
}

}  // namespace east

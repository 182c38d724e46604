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

#include "east/store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace east {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

const char* to_string(StoreDtype dtype) { return dtype == StoreDtype::float32 ? "f32" : "f64"; }

StoreDtype store_dtype_from_string(const std::string& s) {
  if (s == "f32" || s == "float32") return StoreDtype::float32;
  if (s == "f64" || s == "float64") return StoreDtype::float64;
  throw ValidationError("unknown store dtype '" + s + "' (expected f32 or f64)");
}

std::uint64_t StoreHeader::expected_file_bytes() const {
  return kStoreHeaderBytes + n * static_cast<std::uint64_t>(d) * value_bytes();
}

std::vector<std::uint8_t> encode_store(const Tensor& matrix, StoreDtype dtype) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw ValidationError("cannot write an empty store (" + matrix.shape_string() + ")");
  }
  if (matrix.cols() > UINT32_MAX) throw ValidationError("store width exceeds u32");
  std::vector<std::uint8_t> out;
  StoreHeader h{kStoreVersion, dtype, matrix.rows(), static_cast<std::uint32_t>(matrix.cols())};
  out.reserve(h.expected_file_bytes());
  for (char ch : std::string_view("EAST")) out.push_back(static_cast<std::uint8_t>(ch));
  put_le(out, kStoreVersion, 2);
  put_le(out, static_cast<std::uint8_t>(dtype), 1);
  put_le(out, 0, 1);
  put_le(out, h.n, 8);
  put_le(out, h.d, 4);
  for (double v : matrix.data()) {
    if (dtype == StoreDtype::float32) {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    } else {
      put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    }
  }
  return out;
}

StoreHeader decode_store_header(std::span<const std::uint8_t> bytes, std::uint64_t file_bytes,
                                const std::string& name) {
  using Code = StoreFormatError::Code;
  if (bytes.size() < kStoreHeaderBytes) {
    std::ostringstream os;
    os << name << ": truncated header: expected at least " << kStoreHeaderBytes
       << " bytes, got " << bytes.size();
    throw StoreFormatError(Code::truncated_header, bytes.size(), os.str());
  }
  if (std::memcmp(bytes.data(), "EAST", 4) != 0) {
    throw StoreFormatError(Code::bad_magic, 0, name + ": not an EAST store (bad magic at offset 0)");
  }
  StoreHeader h;
  h.version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  if (h.version != kStoreVersion) {
    throw StoreFormatError(Code::bad_version, 4,
                           name + ": unsupported EAST store version " + std::to_string(h.version) +
                               " at offset 4 (supported: 1)");
  }
  const auto dtype = bytes[6];
  if (dtype > 1) {
    throw StoreFormatError(Code::bad_dtype, 6,
                           name + ": unknown dtype code " + std::to_string(dtype) + " at offset 6");
  }
  h.dtype = static_cast<StoreDtype>(dtype);
  if (bytes[7] != 0) {
    throw StoreFormatError(Code::bad_reserved, 7, name + ": reserved byte at offset 7 is not zero");
  }
  h.n = get_le(bytes, 8, 8);
  h.d = static_cast<std::uint32_t>(get_le(bytes, 16, 4));
  // Guard the size computation against absurd headers before multiplying.
  const std::uint64_t max_values = (UINT64_MAX - kStoreHeaderBytes) / 8;
  if (h.d != 0 && h.n > max_values / h.d) {
    throw StoreFormatError(Code::bad_length, 8, name + ": header declares an impossible size");
  }
  if (h.n == 0 || h.d == 0) {
    throw StoreFormatError(Code::bad_length, h.n == 0 ? 8 : 16,
                           name + ": store must have n >= 1 and d >= 1");
  }
  if (file_bytes != h.expected_file_bytes()) {
    std::ostringstream os;
    os << name << ": length mismatch: header (n=" << h.n << ", d=" << h.d << ", "
       << to_string(h.dtype) << ") requires " << h.expected_file_bytes() << " bytes, file has "
       << file_bytes;
    throw StoreFormatError(Code::bad_length, kStoreHeaderBytes, os.str());
  }
  return h;
}

EmbeddingStore decode_store(std::span<const std::uint8_t> bytes, const std::string& name) {
  EmbeddingStore s;
  s.header = decode_store_header(bytes, bytes.size(), name);
  const std::size_t count = s.header.n * s.header.d;
  std::vector<double> values(count);
  std::size_t off = kStoreHeaderBytes;
  if (s.header.dtype == StoreDtype::float32) {
    for (std::size_t i = 0; i < count; ++i, off += 4) {
      values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, off, 4)));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i, off += 8) {
      values[i] = std::bit_cast<double>(get_le(bytes, off, 8));
    }
  }
  s.matrix = Tensor(s.header.n, s.header.d, std::move(values));
  return s;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

void write_store(const std::filesystem::path& path, const Tensor& matrix, StoreDtype dtype) {
  write_file_bytes(path, encode_store(matrix, dtype));
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_store(bytes, path.string());
}

}  // namespace east

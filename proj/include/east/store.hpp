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

// EAST embedding store: one matrix of n rows x d columns in a fixed binary
// layout (all integers and floats little-endian):
//
//   offset  size  field
//        0     4  magic "EAST"
//        4     2  version (u16) = 1
//        6     1  dtype (u8): 0 = float32, 1 = float64
//        7     1  reserved (u8) = 0
//        8     8  n (u64)
//       16     4  d (u32)
//       20   n*d  payload, row-major, 4 or 8 bytes per value
//
// The file length must be exactly 20 + n*d*width. float32 payloads are
// widened to double on read.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "east/error.hpp"
#include "east/tensor.hpp"

namespace east {

enum class StoreDtype : std::uint8_t { float32 = 0, float64 = 1 };

inline constexpr std::size_t kStoreHeaderBytes = 20;
inline constexpr std::uint16_t kStoreVersion = 1;

const char* to_string(StoreDtype dtype);
StoreDtype store_dtype_from_string(const std::string& s);

class StoreFormatError : public ValidationError {
 public:
  enum class Code { truncated_header, bad_magic, bad_version, bad_dtype, bad_reserved, bad_length };

  StoreFormatError(Code code, std::size_t offset, const std::string& message)
      : ValidationError(message), code_(code), offset_(offset) {}

  Code code() const { return code_; }
  /// Byte offset of the offending field.
  std::size_t offset() const { return offset_; }

 private:
  Code code_;
  std::size_t offset_;
};

struct StoreHeader {
  std::uint16_t version = kStoreVersion;
  StoreDtype dtype = StoreDtype::float64;
  std::uint64_t n = 0;
  std::uint32_t d = 0;

  std::size_t value_bytes() const { return dtype == StoreDtype::float32 ? 4 : 8; }
  std::uint64_t expected_file_bytes() const;
};

struct EmbeddingStore {
  StoreHeader header;
  Tensor matrix;
};

std::vector<std::uint8_t> encode_store(const Tensor& matrix, StoreDtype dtype);
/// `name` is only used in error messages.
EmbeddingStore decode_store(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");
/// Validates the header and the total length, without converting the payload.
StoreHeader decode_store_header(std::span<const std::uint8_t> bytes, std::uint64_t file_bytes,
                                const std::string& name = "<memory>");

void write_store(const std::filesystem::path& path, const Tensor& matrix, StoreDtype dtype);
EmbeddingStore read_store(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace east

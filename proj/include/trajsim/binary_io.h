// Copyright 2026 The trajsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitives for the on-disk artifact formats.

#ifndef TRAJSIM_BINARY_IO_H_
#define TRAJSIM_BINARY_IO_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

namespace trajsim {

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void Magic(std::string_view magic);
  void U8(std::uint8_t v);
  void U32(std::uint32_t v);
  void U64(std::uint64_t v);
  void F64(double v);
  void F64s(std::span<const double> values);
  void String(std::string_view s);  // u32 length + UTF-8 bytes

  // Flushes and reports write failures as kIo errors.
  void Close();

 private:
  void Raw(const void* data, std::size_t size);

  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  // Throws kBadInput when the next bytes differ from `magic`.
  void ExpectMagic(std::string_view magic);
  std::uint8_t U8();
  std::uint32_t U32();
  std::uint64_t U64();
  double F64();
  void F64s(std::span<double> out);
  std::string String();

  // Throws kBadInput if unread bytes remain.
  void ExpectEnd();

 private:
  void Raw(void* data, std::size_t size);

  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace trajsim

#endif  // TRAJSIM_BINARY_IO_H_

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

#include "trajsim/binary_io.h"

#include <array>
#include <bit>
#include <vector>

#include "trajsim/common.h"

namespace trajsim {
namespace {

template <typename T>
std::array<unsigned char, sizeof(T)> ToLittleEndian(T v) {
  std::array<unsigned char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  }
  return bytes;
}

template <typename T>
T FromLittleEndian(const unsigned char* bytes) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) ThrowIo("cannot open for writing: " + path.string());
}

void BinaryWriter::Raw(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) ThrowIo("write failed: " + path_.string());
}

void BinaryWriter::Magic(std::string_view magic) { Raw(magic.data(), magic.size()); }

void BinaryWriter::U8(std::uint8_t v) { Raw(&v, 1); }

void BinaryWriter::U32(std::uint32_t v) {
  const auto bytes = ToLittleEndian(v);
  Raw(bytes.data(), bytes.size());
}

void BinaryWriter::U64(std::uint64_t v) {
  const auto bytes = ToLittleEndian(v);
  Raw(bytes.data(), bytes.size());
}

void BinaryWriter::F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::F64s(std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    Raw(values.data(), values.size_bytes());
  } else {
    for (double v : values) F64(v);
  }
}

void BinaryWriter::String(std::string_view s) {
  U32(static_cast<std::uint32_t>(s.size()));
  Raw(s.data(), s.size());
}

void BinaryWriter::Close() {
  out_.flush();
  if (!out_) ThrowIo("flush failed: " + path_.string());
  out_.close();
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) ThrowIo("cannot open for reading: " + path.string());
}

void BinaryReader::Raw(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    ThrowBadInput("truncated file: " + path_.string());
  }
}

void BinaryReader::ExpectMagic(std::string_view magic) {
  std::string got(magic.size(), '\0');
  Raw(got.data(), got.size());
  if (got != magic) {
    ThrowBadInput("bad magic in " + path_.string() + ": expected " +
                  std::string(magic));
  }
}

std::uint8_t BinaryReader::U8() {
  std::uint8_t v = 0;
  Raw(&v, 1);
  return v;
}

std::uint32_t BinaryReader::U32() {
  unsigned char bytes[4];
  Raw(bytes, 4);
  return FromLittleEndian<std::uint32_t>(bytes);
}

std::uint64_t BinaryReader::U64() {
  unsigned char bytes[8];
  Raw(bytes, 8);
  return FromLittleEndian<std::uint64_t>(bytes);
}

double BinaryReader::F64() { return std::bit_cast<double>(U64()); }

void BinaryReader::F64s(std::span<double> out) {
  if constexpr (std::endian::native == std::endian::little) {
    Raw(out.data(), out.size_bytes());
  } else {
    for (double& v : out) v = F64();
  }
}

std::string BinaryReader::String() {
  const std::uint32_t size = U32();
  std::string s(size, '\0');
  Raw(s.data(), size);
  return s;
}

void BinaryReader::ExpectEnd() {
  if (in_.peek() != std::char_traits<char>::eof()) {
    ThrowBadInput("trailing bytes in " + path_.string());
  }
}

}  // namespace trajsim

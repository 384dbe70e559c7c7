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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "trajsim/common.h"

namespace trajsim {
namespace {

std::filesystem::path TempPath(const std::string& name) {
  return std::filesystem::path(::testing::TempDir()) / name;
}

std::vector<unsigned char> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(BinaryIoTest, RoundTripsEveryPrimitive) {
  const auto path = TempPath("primitives.bin");
  const std::vector<double> values = {0.0, -0.0, 1.5, std::numeric_limits<double>::max(),
                                      std::numeric_limits<double>::denorm_min()};
  {
    BinaryWriter w(path);
    w.Magic("TESTMAGC");
    w.U8(200);
    w.U32(0xDEADBEEF);
    w.U64(0x0123456789ABCDEFull);
    w.F64(-3.25);
    w.F64s(values);
    w.String("c0_0001");
    w.Close();
  }
  BinaryReader r(path);
  r.ExpectMagic("TESTMAGC");
  EXPECT_EQ(r.U8(), 200);
  EXPECT_EQ(r.U32(), 0xDEADBEEFu);
  EXPECT_EQ(r.U64(), 0x0123456789ABCDEFull);
  EXPECT_EQ(r.F64(), -3.25);
  std::vector<double> back(values.size());
  r.F64s(back);
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_EQ(std::signbit(back[i]), std::signbit(values[i]));
    EXPECT_EQ(back[i], values[i]);
  }
  EXPECT_EQ(r.String(), "c0_0001");
  r.ExpectEnd();
}

TEST(BinaryIoTest, WritesLittleEndian) {
  const auto path = TempPath("endian.bin");
  {
    BinaryWriter w(path);
    w.U32(0x04030201);
    w.F64(1.0);  // 0x3FF0000000000000
    w.Close();
  }
  const std::vector<unsigned char> expected = {1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  EXPECT_EQ(ReadBytes(path), expected);
}

TEST(BinaryIoTest, TruncatedFileIsBadInput) {
  const auto path = TempPath("short.bin");
  {
    BinaryWriter w(path);
    w.U8(1);
    w.Close();
  }
  BinaryReader r(path);
  try {
    r.U32();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadInput);
  }
}

TEST(BinaryIoTest, WrongMagicAndTrailingBytesAreBadInput) {
  const auto path = TempPath("magic.bin");
  {
    BinaryWriter w(path);
    w.Magic("AAAAAAAA");
    w.U8(0);
    w.Close();
  }
  {
    BinaryReader r(path);
    EXPECT_THROW(r.ExpectMagic("BBBBBBBB"), Error);
  }
  BinaryReader r(path);
  r.ExpectMagic("AAAAAAAA");
  EXPECT_THROW(r.ExpectEnd(), Error);
}

TEST(BinaryIoTest, MissingFileIsIoError) {
  try {
    BinaryReader r(TempPath("does_not_exist.bin"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace trajsim

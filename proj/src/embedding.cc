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

#include "trajsim/embedding.h"

#include <span>
#include <unordered_set>

#include "trajsim/binary_io.h"
#include "trajsim/common.h"

namespace trajsim {
namespace {

constexpr std::string_view kEmbeddingMagic = "TSEMBED1";

}  // namespace

void ValidateEmbeddingSet(const EmbeddingSet& embeddings) {
  if (static_cast<std::size_t>(embeddings.vectors.rows()) != embeddings.ids.size()) {
    ThrowBadInput("embedding row count does not match the ID count");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& id : embeddings.ids) {
    if (!seen.insert(id).second) ThrowBadInput("duplicate embedding id: " + id);
  }
  if (!embeddings.vectors.allFinite()) ThrowNumeric("non-finite embedding entries");
}

void WriteEmbeddingFile(const std::filesystem::path& path, const EmbeddingSet& embeddings) {
  ValidateEmbeddingSet(embeddings);
  BinaryWriter w(path);
  w.Magic(kEmbeddingMagic);
  w.U32(static_cast<std::uint32_t>(embeddings.vectors.rows()));
  w.U32(static_cast<std::uint32_t>(embeddings.vectors.cols()));
  for (const std::string& id : embeddings.ids) w.String(id);
  w.F64s(std::span<const double>(embeddings.vectors.data(),
                                 static_cast<std::size_t>(embeddings.vectors.size())));
  w.Close();
}

EmbeddingSet ReadEmbeddingFile(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectMagic(kEmbeddingMagic);
  const std::uint32_t n = r.U32();
  const std::uint32_t dim = r.U32();
  EmbeddingSet embeddings;
  embeddings.ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) embeddings.ids.push_back(r.String());
  embeddings.vectors.resize(n, dim);
  r.F64s(std::span<double>(embeddings.vectors.data(),
                           static_cast<std::size_t>(embeddings.vectors.size())));
  r.ExpectEnd();
  ValidateEmbeddingSet(embeddings);
  return embeddings;
}

std::vector<std::string> SequentialIds(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

}  // namespace trajsim

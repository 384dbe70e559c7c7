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

#ifndef TRAJSIM_EMBEDDING_H_
#define TRAJSIM_EMBEDDING_H_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace trajsim {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Final trajectory embeddings; row r belongs to ids[r].
struct EmbeddingSet {
  std::vector<std::string> ids;
  Matrix vectors;

  std::size_t size() const { return ids.size(); }
};

// Throws kBadInput on duplicate IDs or a row-count mismatch, kNumeric on
// non-finite entries.
void ValidateEmbeddingSet(const EmbeddingSet& embeddings);

// "TSE1": magic, u32 n, u32 D, n length-prefixed IDs, n x D float64.
void WriteEmbeddingFile(const std::filesystem::path& path, const EmbeddingSet& embeddings);
EmbeddingSet ReadEmbeddingFile(const std::filesystem::path& path);

// "0", "1", ... for graphs built without trajectory IDs.
std::vector<std::string> SequentialIds(std::size_t n);

}  // namespace trajsim

#endif  // TRAJSIM_EMBEDDING_H_

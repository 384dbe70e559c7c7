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

// Exact top-K retrieval and the hit-ratio / recall evaluation protocol.
// Every ranking breaks ties by ascending trajectory ID.

#ifndef TRAJSIM_SEARCH_EVAL_H_
#define TRAJSIM_SEARCH_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajsim/distance.h"
#include "trajsim/embedding.h"

namespace trajsim {

// lists[q] ranks the other rows for query row queries[q], nearest first.
struct RankedLists {
  std::size_t depth = 0;
  std::vector<std::uint32_t> queries;
  std::vector<std::vector<std::uint32_t>> lists;
};

// Every row 0..n-1.
std::vector<std::uint32_t> AllRows(std::size_t n);

// A seeded random subset holding round(fraction * n) rows, sorted ascending.
std::vector<std::uint32_t> SampleQueryRows(std::size_t n, double fraction,
                                           std::uint64_t seed);

using GroundTruth = RankedLists;
using Retrieval = RankedLists;

// Top-N by raw distance for each query row (all rows when `queries` is
// empty), excluding the query itself.
GroundTruth GroundTruthTopN(const RawDistanceMatrix& raw,
                            std::span<const std::string> ids, std::size_t top_n,
                            std::span<const std::uint32_t> queries = {});

// Exact K nearest rows to `query_row` by squared Euclidean distance.
std::vector<std::uint32_t> KnnSearchRow(const EmbeddingSet& embeddings,
                                        std::size_t query_row, std::size_t k);

// As KnnSearchRow, addressed and answered by trajectory ID.
std::vector<std::string> KnnSearch(const EmbeddingSet& embeddings,
                                   const std::string& query_id, std::size_t k);

// Leave-one-out top-K lists for each query row (all rows when empty).
Retrieval RetrieveAll(const EmbeddingSet& embeddings, std::size_t k,
                      std::span<const std::uint32_t> queries = {});

// Mean over queries of |X[:k] n Y[:n]| / n, for k >= n. Lists deeper than
// k or n are truncated, so one deep retrieval serves several metrics. Both
// sides must cover the same queries.
double RecallNAtK(const Retrieval& retrieval, const GroundTruth& truth, std::size_t n,
                  std::size_t k);

// HR@K: recall with n = k.
double HitRatio(const Retrieval& retrieval, const GroundTruth& truth, std::size_t k);

struct EvaluationReport {
  DistanceKind metric = DistanceKind::kFrechet;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  // Unset when the dataset is too small for the list depth.
  std::optional<double> hr10;
  std::optional<double> hr50;
  std::optional<double> r10_at_50;
};

// Runs the protocol with every trajectory as a query, or only `queries`
// when given. Embedding rows must line up with the raw matrix rows.
EvaluationReport Evaluate(const EmbeddingSet& embeddings, const RawDistanceMatrix& raw,
                          std::uint64_t seed,
                          std::span<const std::uint32_t> queries = {});

// {"metric_distance", "HR@10", "HR@50", "R10@50", "n", "seed"}; metrics that
// do not fit the dataset are null.
std::string EvaluationReportJson(const EvaluationReport& report);

}  // namespace trajsim

#endif  // TRAJSIM_SEARCH_EVAL_H_

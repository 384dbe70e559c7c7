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

#include "trajsim/search_eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "trajsim/common.h"

namespace trajsim {
namespace {

// Top-k rows other than `self` by (distance, id).
std::vector<std::uint32_t> RankRow(std::span<const double> distances,
                                   std::span<const std::string> ids, std::size_t self,
                                   std::size_t k) {
  std::vector<std::uint32_t> order;
  order.reserve(distances.size() - 1);
  for (std::size_t j = 0; j < distances.size(); ++j) {
    if (j != self) order.push_back(static_cast<std::uint32_t>(j));
  }
  const auto closer = [&](std::uint32_t a, std::uint32_t b) {
    if (distances[a] != distances[b]) return distances[a] < distances[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), closer);
  order.resize(k);
  return order;
}

std::vector<std::uint32_t> ResolveQueries(std::span<const std::uint32_t> queries,
                                          std::size_t n) {
  if (queries.empty()) return AllRows(n);
  for (std::uint32_t q : queries) {
    if (q >= n) ThrowBadInput("query row out of range");
  }
  return {queries.begin(), queries.end()};
}

std::vector<double> SquaredDistancesFrom(const EmbeddingSet& embeddings, std::size_t row) {
  const Matrix& v = embeddings.vectors;
  const auto query = v.row(static_cast<Eigen::Index>(row));
  std::vector<double> out(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    out[static_cast<std::size_t>(j)] = (v.row(j) - query).squaredNorm();
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> AllRows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

std::vector<std::uint32_t> SampleQueryRows(std::size_t n, double fraction,
                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    ThrowBadInput("query fraction must lie in (0, 1]");
  }
  std::vector<std::uint32_t> rows = AllRows(n);
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  rows.resize(std::min(keep, n));
  std::sort(rows.begin(), rows.end());
  return rows;
}

GroundTruth GroundTruthTopN(const RawDistanceMatrix& raw,
                            std::span<const std::string> ids, std::size_t top_n,
                            std::span<const std::uint32_t> queries) {
  const std::size_t n = raw.n();
  if (ids.size() != n) ThrowBadInput("id count does not match the distance matrix");
  if (top_n >= n) {
    ThrowBadInput("top-N of " + std::to_string(top_n) + " needs more than " +
                  std::to_string(top_n) + " trajectories");
  }
  GroundTruth truth;
  truth.depth = top_n;
  truth.queries = ResolveQueries(queries, n);
  truth.lists.reserve(truth.queries.size());
  for (std::uint32_t q : truth.queries) {
    truth.lists.push_back(
        RankRow(std::span<const double>(raw.values.row(q), n), ids, q, top_n));
  }
  return truth;
}

std::vector<std::uint32_t> KnnSearchRow(const EmbeddingSet& embeddings,
                                        std::size_t query_row, std::size_t k) {
  const std::size_t n = embeddings.size();
  if (query_row >= n) ThrowBadInput("query row out of range");
  if (k >= n) {
    ThrowBadInput("K = " + std::to_string(k) + " needs more than " + std::to_string(k) +
                  " embeddings");
  }
  const std::vector<double> dist = SquaredDistancesFrom(embeddings, query_row);
  return RankRow(dist, embeddings.ids, query_row, k);
}

std::vector<std::string> KnnSearch(const EmbeddingSet& embeddings,
                                   const std::string& query_id, std::size_t k) {
  const auto it = std::find(embeddings.ids.begin(), embeddings.ids.end(), query_id);
  if (it == embeddings.ids.end()) ThrowBadInput("unknown trajectory id: " + query_id);
  const auto row = static_cast<std::size_t>(it - embeddings.ids.begin());
  std::vector<std::string> out;
  for (std::uint32_t j : KnnSearchRow(embeddings, row, k)) out.push_back(embeddings.ids[j]);
  return out;
}

Retrieval RetrieveAll(const EmbeddingSet& embeddings, std::size_t k,
                      std::span<const std::uint32_t> queries) {
  Retrieval retrieval;
  retrieval.depth = k;
  retrieval.queries = ResolveQueries(queries, embeddings.size());
  retrieval.lists.reserve(retrieval.queries.size());
  for (std::uint32_t q : retrieval.queries) {
    retrieval.lists.push_back(KnnSearchRow(embeddings, q, k));
  }
  return retrieval;
}

double RecallNAtK(const Retrieval& retrieval, const GroundTruth& truth, std::size_t n,
                  std::size_t k) {
  if (k < n) ThrowBadInput("recall needs K >= N");
  if (n == 0) ThrowBadInput("N must be positive");
  if (retrieval.depth < k || truth.depth < n) {
    ThrowBadInput("ranked lists are shallower than the requested K or N");
  }
  if (retrieval.queries != truth.queries) {
    ThrowBadInput("retrieval and ground truth cover different queries");
  }
  if (retrieval.queries.empty()) ThrowBadInput("no queries to evaluate");

  double total = 0.0;
  std::vector<std::uint32_t> predicted;
  std::vector<std::uint32_t> expected;
  for (std::size_t q = 0; q < retrieval.queries.size(); ++q) {
    predicted.assign(retrieval.lists[q].begin(), retrieval.lists[q].begin() + k);
    expected.assign(truth.lists[q].begin(), truth.lists[q].begin() + n);
    std::sort(predicted.begin(), predicted.end());
    std::sort(expected.begin(), expected.end());
    std::size_t hits = 0;
    auto p = predicted.begin();
    for (std::uint32_t e : expected) {
      p = std::lower_bound(p, predicted.end(), e);
      if (p != predicted.end() && *p == e) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(n);
  }
  return total / static_cast<double>(retrieval.queries.size());
}

double HitRatio(const Retrieval& retrieval, const GroundTruth& truth, std::size_t k) {
  return RecallNAtK(retrieval, truth, k, k);
}

EvaluationReport Evaluate(const EmbeddingSet& embeddings, const RawDistanceMatrix& raw,
                          std::uint64_t seed, std::span<const std::uint32_t> queries) {
  ValidateEmbeddingSet(embeddings);
  const std::size_t n = raw.n();
  if (embeddings.size() != n) {
    ThrowBadInput("embedding count does not match the distance matrix");
  }
  EvaluationReport report;
  report.metric = raw.kind;
  report.n = n;
  report.seed = seed;

  const std::size_t depth = std::min<std::size_t>(50, n - 1);
  if (depth < 10) return report;
  const GroundTruth truth = GroundTruthTopN(raw, embeddings.ids, depth, queries);
  const Retrieval retrieval = RetrieveAll(embeddings, depth, queries);
  report.hr10 = HitRatio(retrieval, truth, 10);
  if (depth >= 50) {
    report.hr50 = HitRatio(retrieval, truth, 50);
    report.r10_at_50 = RecallNAtK(retrieval, truth, 10, 50);
  }
  return report;
}

std::string EvaluationReportJson(const EvaluationReport& report) {
  const auto metric = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::ordered_json out;
  out["metric_distance"] = std::string(DistanceKindName(report.metric));
  out["HR@10"] = metric(report.hr10);
  out["HR@50"] = metric(report.hr50);
  out["R10@50"] = metric(report.r10_at_50);
  out["n"] = report.n;
  out["seed"] = report.seed;
  return out.dump(2);
}

}  // namespace trajsim

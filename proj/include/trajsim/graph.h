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

// Multi-scale similarity graph: one layer per distance band [c_{k-1}, c_k)
// with doubling thresholds c_k = 2 c_{k-1}.

#ifndef TRAJSIM_GRAPH_H_
#define TRAJSIM_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajsim/distance.h"

namespace trajsim {

// c[0] < c[1] < ... < c[m], each exactly twice the previous.
struct Thresholds {
  std::vector<double> c;

  std::size_t layers() const { return c.empty() ? 0 : c.size() - 1; }
};

Thresholds MakeThresholds(double c0, std::size_t layers);

// Throws kBadInput unless c is non-empty, c[0] > 0 and every step doubles.
void ValidateThresholds(const Thresholds& thresholds);

struct ThresholdChoice {
  Thresholds thresholds;
  double percentile = 10.0;
  // Off-diagonal distances agree to ~15 significant digits.
  bool degenerate = false;
  // Fraction of pairs at or above c_m; those pairs get no edge.
  double fraction_above_top = 0.0;
};

// Symmetrized distance (d_ij + d_ji) / 2.
inline double SymmetrizedDistance(const DistanceMatrix& d, std::size_t i, std::size_t j) {
  return 0.5 * (d.values(i, j) + d.values(j, i));
}

// Linear-interpolation percentile (q in [0, 100]) of an unsorted sample.
double Percentile(std::vector<double> sample, double q);

// c_0 is the q-th percentile of the symmetrized off-diagonal distances.
ThresholdChoice ChooseThresholds(const DistanceMatrix& d, std::size_t layers,
                                 double percentile = 10.0);

struct Edge {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;
  double weight = 0.0;  // 1 - symmetrized distance, in (0, 1]

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphLayer {
  std::size_t n = 0;
  std::vector<Edge> edges;  // sorted by (i, j)
};

struct MultiScaleGraph {
  std::vector<GraphLayer> layers;
  Thresholds thresholds;
  std::vector<std::string> node_ids;  // may be empty when unknown

  std::size_t n() const { return layers.empty() ? 0 : layers.front().n; }
  std::size_t num_layers() const { return layers.size(); }
};

// Places pair (i, j) in layer k iff c_{k-1} <= d~_ij < c_k. Pairs whose
// weight 1 - d~_ij is not positive form no connection.
MultiScaleGraph BuildGraph(const DistanceMatrix& d, const Thresholds& thresholds,
                           std::vector<std::string> node_ids = {});

struct CoverageReport {
  std::size_t triples_checked = 0;
  // Two-hop pairs in layer k < m not connected in any layer <= k + 1.
  std::size_t violations = 0;
  // Two-hop pairs in the top layer that fall past c_m; no layer above
  // exists to hold them, so they are reported but not counted as violations.
  std::size_t top_layer_escapes = 0;
};

// For every r with neighbors p, q in layer k, checks that (p, q) is connected
// in some layer <= k + 1 or lies below c_0.
CoverageReport CoverageCheck(const MultiScaleGraph& graph, const DistanceMatrix& d);

// "TSG1" graph files. Node IDs are not part of the format.
void WriteGraphFile(const std::filesystem::path& path, const MultiScaleGraph& graph);
MultiScaleGraph ReadGraphFile(const std::filesystem::path& path);

}  // namespace trajsim

#endif  // TRAJSIM_GRAPH_H_

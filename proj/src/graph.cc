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

#include "trajsim/graph.h"

#include <algorithm>
#include <cmath>

#include "trajsim/binary_io.h"

namespace trajsim {
namespace {

constexpr std::string_view kGraphMagic = "TSGRAPH1";

// Layer index (1-based) for a symmetrized distance, 0 when outside [c_0, c_m).
std::size_t BandOf(const Thresholds& t, double value) {
  if (value < t.c.front() || value >= t.c.back()) return 0;
  // First threshold strictly greater than value is c_k.
  const auto it = std::upper_bound(t.c.begin(), t.c.end(), value);
  return static_cast<std::size_t>(it - t.c.begin());
}

}  // namespace

Thresholds MakeThresholds(double c0, std::size_t layers) {
  if (layers < 1) ThrowBadInput("graph needs at least one layer");
  if (!(c0 > 0.0) || !std::isfinite(c0)) ThrowBadInput("c_0 must be positive");
  Thresholds t;
  t.c.reserve(layers + 1);
  t.c.push_back(c0);
  for (std::size_t k = 1; k <= layers; ++k) t.c.push_back(2.0 * t.c.back());
  return t;
}

void ValidateThresholds(const Thresholds& thresholds) {
  const auto& c = thresholds.c;
  if (c.size() < 2) ThrowBadInput("thresholds need at least c_0 and c_1");
  if (!(c[0] > 0.0) || !std::isfinite(c[0])) ThrowBadInput("c_0 must be positive");
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (c[k] != 2.0 * c[k - 1]) ThrowBadInput("thresholds must double at every step");
  }
}

double Percentile(std::vector<double> sample, double q) {
  if (sample.empty()) ThrowBadInput("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) ThrowBadInput("percentile must lie in [0, 100]");
  const double pos = q / 100.0 * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(sample.begin(), sample.begin() + lo, sample.end());
  const double lo_value = sample[lo];
  if (frac == 0.0) return lo_value;
  const double hi_value = *std::min_element(sample.begin() + lo + 1, sample.end());
  return lo_value + frac * (hi_value - lo_value);
}

ThresholdChoice ChooseThresholds(const DistanceMatrix& d, std::size_t layers,
                                 double percentile) {
  if (layers < 1) ThrowBadInput("graph needs at least one layer");
  const std::size_t n = d.n();
  if (n < 2) ThrowBadInput("need at least 2 nodes to choose thresholds");

  std::vector<double> sample;
  sample.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sample.push_back(SymmetrizedDistance(d, i, j));
  }
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  ThresholdChoice choice;
  choice.percentile = percentile;
  choice.degenerate = (*hi - *lo) <= 1e-15 * std::max(1.0, std::abs(*hi));

  const double c0 = Percentile(sample, percentile);
  if (!(c0 > 0.0)) ThrowBadInput("c_0 percentile is not positive");
  choice.thresholds = MakeThresholds(c0, layers);

  const double top = choice.thresholds.c.back();
  const auto above = std::count_if(sample.begin(), sample.end(),
                                   [top](double v) { return v >= top; });
  choice.fraction_above_top =
      static_cast<double>(above) / static_cast<double>(sample.size());
  return choice;
}

MultiScaleGraph BuildGraph(const DistanceMatrix& d, const Thresholds& thresholds,
                           std::vector<std::string> node_ids) {
  ValidateThresholds(thresholds);
  const std::size_t n = d.n();
  if (!node_ids.empty() && node_ids.size() != n) {
    ThrowBadInput("node id count does not match the distance matrix");
  }

  MultiScaleGraph graph;
  graph.thresholds = thresholds;
  graph.node_ids = std::move(node_ids);
  graph.layers.assign(thresholds.layers(), GraphLayer{n, {}});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sym = SymmetrizedDistance(d, i, j);
      const std::size_t band = BandOf(thresholds, sym);
      const double weight = 1.0 - sym;
      if (band == 0 || !(weight > 0.0)) continue;
      graph.layers[band - 1].edges.push_back(
          {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), weight});
    }
  }
  return graph;
}

CoverageReport CoverageCheck(const MultiScaleGraph& graph, const DistanceMatrix& d) {
  const std::size_t n = graph.n();
  const std::size_t m = graph.num_layers();
  if (d.n() != n) ThrowBadInput("graph and distance matrix disagree on node count");

  // layer_of(i, j): 1-based layer holding the pair, 0 if unconnected.
  std::vector<std::uint16_t> layer_of(n * n, 0);
  std::vector<std::vector<std::vector<std::uint32_t>>> adjacency(
      m, std::vector<std::vector<std::uint32_t>>(n));
  for (std::size_t k = 0; k < m; ++k) {
    for (const Edge& e : graph.layers[k].edges) {
      layer_of[e.i * n + e.j] = layer_of[e.j * n + e.i] = static_cast<std::uint16_t>(k + 1);
      adjacency[k][e.i].push_back(e.j);
      adjacency[k][e.j].push_back(e.i);
    }
  }

  const double c0 = graph.thresholds.c.front();
  CoverageReport report;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t allowed = k + 2;  // 1-based layer k + 1
    for (std::size_t r = 0; r < n; ++r) {
      const auto& nbrs = adjacency[k][r];
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
          const std::size_t p = nbrs[a];
          const std::size_t q = nbrs[b];
          ++report.triples_checked;
          const std::uint16_t layer = layer_of[p * n + q];
          if (layer != 0 && layer <= allowed) continue;
          if (SymmetrizedDistance(d, p, q) < c0) continue;
          if (k + 1 == m) {
            ++report.top_layer_escapes;
          } else {
            ++report.violations;
          }
        }
      }
    }
  }
  return report;
}

void WriteGraphFile(const std::filesystem::path& path, const MultiScaleGraph& graph) {
  BinaryWriter w(path);
  w.Magic(kGraphMagic);
  w.U32(static_cast<std::uint32_t>(graph.n()));
  w.U32(static_cast<std::uint32_t>(graph.num_layers()));
  w.F64s(graph.thresholds.c);
  for (const GraphLayer& layer : graph.layers) {
    w.U64(layer.edges.size());
    for (const Edge& e : layer.edges) {
      w.U32(e.i);
      w.U32(e.j);
      w.F64(e.weight);
    }
  }
  w.Close();
}

MultiScaleGraph ReadGraphFile(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectMagic(kGraphMagic);
  const std::uint32_t n = r.U32();
  const std::uint32_t m = r.U32();
  if (m < 1) ThrowBadInput("graph file has no layers: " + path.string());

  MultiScaleGraph graph;
  graph.thresholds.c.resize(m + 1);
  r.F64s(graph.thresholds.c);
  ValidateThresholds(graph.thresholds);
  graph.layers.assign(m, GraphLayer{n, {}});
  for (GraphLayer& layer : graph.layers) {
    const std::uint64_t count = r.U64();
    if (count > static_cast<std::uint64_t>(n) * n) {
      ThrowBadInput("implausible edge count in " + path.string());
    }
    layer.edges.resize(count);
    for (Edge& e : layer.edges) {
      e.i = r.U32();
      e.j = r.U32();
      e.weight = r.F64();
      if (e.i >= e.j || e.j >= n) ThrowBadInput("bad edge in " + path.string());
    }
  }
  r.ExpectEnd();
  return graph;
}

}  // namespace trajsim

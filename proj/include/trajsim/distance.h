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

// Pairwise trajectory distances and their row-softmax normalization.

#ifndef TRAJSIM_DISTANCE_H_
#define TRAJSIM_DISTANCE_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "trajsim/common.h"

namespace trajsim {

enum class DistanceKind : std::uint8_t { kFrechet = 0, kHausdorff = 1 };

DistanceKind ParseDistanceKind(std::string_view name);
std::string_view DistanceKindName(DistanceKind kind);

// Euclidean ground metric shared by both trajectory distances.
inline double PointDistance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Discrete Frechet distance via the O(|a||b|) coupling DP. Keeps its DP rows
// between calls so one instance per worker avoids reallocating per pair.
class FrechetWorkspace {
 public:
  double Distance(std::span<const Point2> a, std::span<const Point2> b);

 private:
  std::vector<double> prev_;
  std::vector<double> curr_;
};

double DiscreteFrechet(std::span<const Point2> a, std::span<const Point2> b);

// max of the two directed sup-inf distances.
double Hausdorff(std::span<const Point2> a, std::span<const Point2> b);

// Raw pairwise distances in meters. Symmetric with a zero diagonal.
struct RawDistanceMatrix {
  DistanceKind kind = DistanceKind::kFrechet;
  SquareMatrix values;

  std::size_t n() const { return values.n(); }
};

// Row-normalized distances d_ij = 1 - softmax_j(-raw_ij / scale_divisor).
// Rows of (1 - d) sum to one; the matrix is not symmetric in general.
struct DistanceMatrix {
  DistanceKind kind = DistanceKind::kFrechet;
  double scale_divisor = 1.0;
  SquareMatrix values;

  std::size_t n() const { return values.n(); }
};

// Computes the i < j half and mirrors it. `workers` threads split rows; the
// result is bit-identical for any worker count.
RawDistanceMatrix ComputeRawDistanceMatrix(std::span<const PointSequence> trajectories,
                                           DistanceKind kind, unsigned workers = 1);

// Median of the off-diagonal (i < j) raw distances. Falls back to the mean of
// the positive entries when the median is zero, and to 1 when all are zero.
double MedianScaleDivisor(const RawDistanceMatrix& raw);

DistanceMatrix NormalizeDistances(const RawDistanceMatrix& raw);

// "TSM1" matrix files. `normalized` selects which flavor is written; the
// divisor recorded for a raw matrix is the one normalization would use.
void WriteMatrixFile(const std::filesystem::path& path, const RawDistanceMatrix& raw);
void WriteMatrixFile(const std::filesystem::path& path, const DistanceMatrix& d);
RawDistanceMatrix ReadRawMatrixFile(const std::filesystem::path& path);
DistanceMatrix ReadNormalizedMatrixFile(const std::filesystem::path& path);

}  // namespace trajsim

#endif  // TRAJSIM_DISTANCE_H_

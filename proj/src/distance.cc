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

#include "trajsim/distance.h"

#include <algorithm>
#include <limits>
#include <string>
#include <thread>

#include "trajsim/binary_io.h"

namespace trajsim {
namespace {

constexpr std::string_view kMatrixMagic = "TSMATRX1";

void RequireNonEmpty(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) ThrowBadInput("distance of an empty point sequence");
}

double DirectedHausdorff(std::span<const Point2> from, std::span<const Point2> to) {
  double worst = 0.0;
  for (const Point2& p : from) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Point2& q : to) {
      nearest = std::min(nearest, PointDistance(p, q));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

void WriteHeader(BinaryWriter& w, std::size_t n, DistanceKind kind, bool normalized,
                 double divisor) {
  w.Magic(kMatrixMagic);
  w.U32(static_cast<std::uint32_t>(n));
  w.U8(static_cast<std::uint8_t>(kind));
  w.U8(normalized ? 1 : 0);
  w.F64(divisor);
}

struct MatrixFile {
  DistanceKind kind;
  bool normalized;
  double divisor;
  SquareMatrix values;
};

MatrixFile ReadMatrix(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectMagic(kMatrixMagic);
  const std::uint32_t n = r.U32();
  const std::uint8_t kind = r.U8();
  if (kind > 1) ThrowBadInput("unknown distance kind tag in " + path.string());
  const std::uint8_t normalized = r.U8();
  const double divisor = r.F64();
  SquareMatrix values(n);
  r.F64s(values.values());
  r.ExpectEnd();
  return {static_cast<DistanceKind>(kind), normalized != 0, divisor, std::move(values)};
}

}  // namespace

DistanceKind ParseDistanceKind(std::string_view name) {
  if (name == "frechet") return DistanceKind::kFrechet;
  if (name == "hausdorff") return DistanceKind::kHausdorff;
  ThrowBadInput("unknown distance kind: " + std::string(name));
}

std::string_view DistanceKindName(DistanceKind kind) {
  return kind == DistanceKind::kFrechet ? "frechet" : "hausdorff";
}

double FrechetWorkspace::Distance(std::span<const Point2> a, std::span<const Point2> b) {
  RequireNonEmpty(a, b);
  const std::size_t cols = b.size();
  prev_.assign(cols, 0.0);
  curr_.assign(cols, 0.0);

  // Row 0: the only coupling to b[j] walks b while a stays at a[0].
  prev_[0] = PointDistance(a[0], b[0]);
  for (std::size_t j = 1; j < cols; ++j) {
    prev_[j] = std::max(prev_[j - 1], PointDistance(a[0], b[j]));
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    curr_[0] = std::max(prev_[0], PointDistance(a[i], b[0]));
    for (std::size_t j = 1; j < cols; ++j) {
      const double reach = std::min({prev_[j], prev_[j - 1], curr_[j - 1]});
      curr_[j] = std::max(reach, PointDistance(a[i], b[j]));
    }
    std::swap(prev_, curr_);
  }
  return prev_[cols - 1];
}

double DiscreteFrechet(std::span<const Point2> a, std::span<const Point2> b) {
  FrechetWorkspace workspace;
  return workspace.Distance(a, b);
}

double Hausdorff(std::span<const Point2> a, std::span<const Point2> b) {
  RequireNonEmpty(a, b);
  return std::max(DirectedHausdorff(a, b), DirectedHausdorff(b, a));
}

RawDistanceMatrix ComputeRawDistanceMatrix(std::span<const PointSequence> trajectories,
                                           DistanceKind kind, unsigned workers) {
  const std::size_t n = trajectories.size();
  if (n < 2) ThrowBadInput("need at least 2 trajectories for a distance matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (trajectories[i].empty()) {
      ThrowBadInput("trajectory " + std::to_string(i) + " is empty");
    }
  }

  RawDistanceMatrix raw{kind, SquareMatrix(n, 0.0)};
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));

  // Rows are dealt round-robin; each (i, j), i < j, is owned by row i's worker.
  auto work = [&](unsigned worker) {
    FrechetWorkspace workspace;
    for (std::size_t i = worker; i < n; i += workers) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = kind == DistanceKind::kFrechet
                             ? workspace.Distance(trajectories[i], trajectories[j])
                             : Hausdorff(trajectories[i], trajectories[j]);
        raw.values(i, j) = v;
        raw.values(j, i) = v;
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return raw;
}

double MedianScaleDivisor(const RawDistanceMatrix& raw) {
  const std::size_t n = raw.n();
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(raw.values(i, j));
  }
  if (upper.empty()) return 1.0;

  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + mid, upper.end());
  double median = upper[mid];
  if (upper.size() % 2 == 0) {
    const double below = *std::max_element(upper.begin(), upper.begin() + mid);
    median = 0.5 * (below + median);
  }
  if (median > 0.0) return median;

  double sum = 0.0;
  std::size_t positive = 0;
  for (double v : upper) {
    if (v > 0.0) {
      sum += v;
      ++positive;
    }
  }
  return positive > 0 ? sum / static_cast<double>(positive) : 1.0;
}

DistanceMatrix NormalizeDistances(const RawDistanceMatrix& raw) {
  const std::size_t n = raw.n();
  for (double v : raw.values.values()) {
    if (!std::isfinite(v)) ThrowNumeric("non-finite raw distance");
  }

  DistanceMatrix d{raw.kind, MedianScaleDivisor(raw), SquareMatrix(n)};
  const double scale = 1.0 / d.scale_divisor;
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    // The row minimum is the zero diagonal, so every exponent is <= 0.
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      weights[k] = std::exp(-scale * raw.values(i, k));
      total += weights[k];
    }
    for (std::size_t j = 0; j < n; ++j) d.values(i, j) = 1.0 - weights[j] / total;
  }
  return d;
}

void WriteMatrixFile(const std::filesystem::path& path, const RawDistanceMatrix& raw) {
  BinaryWriter w(path);
  WriteHeader(w, raw.n(), raw.kind, /*normalized=*/false, MedianScaleDivisor(raw));
  w.F64s(raw.values.values());
  w.Close();
}

void WriteMatrixFile(const std::filesystem::path& path, const DistanceMatrix& d) {
  BinaryWriter w(path);
  WriteHeader(w, d.n(), d.kind, /*normalized=*/true, d.scale_divisor);
  w.F64s(d.values.values());
  w.Close();
}

RawDistanceMatrix ReadRawMatrixFile(const std::filesystem::path& path) {
  MatrixFile file = ReadMatrix(path);
  if (file.normalized) ThrowBadInput(path.string() + " holds a normalized matrix");
  return {file.kind, std::move(file.values)};
}

DistanceMatrix ReadNormalizedMatrixFile(const std::filesystem::path& path) {
  MatrixFile file = ReadMatrix(path);
  if (!file.normalized) ThrowBadInput(path.string() + " holds a raw matrix");
  return {file.kind, file.divisor, std::move(file.values)};
}

}  // namespace trajsim

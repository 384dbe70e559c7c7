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

// Raw trajectory parsing, length filtering and 2-D gridding.

#ifndef TRAJSIM_INGEST_H_
#define TRAJSIM_INGEST_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trajsim/common.h"

namespace trajsim {

struct RawPoint {
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]
  std::optional<double> t;  // seconds since epoch

  friend bool operator==(const RawPoint&, const RawPoint&) = default;
};

struct Trajectory {
  std::string id;
  std::vector<RawPoint> points;  // non-empty, timestamps non-decreasing
};

enum class DatasetFormat { kPortoCsv, kGeolifePlt, kCanonicalJsonl };

// Accepts "porto_csv", "geolife_plt" and "canonical_jsonl".
DatasetFormat ParseDatasetFormat(std::string_view tag);
std::string_view DatasetFormatName(DatasetFormat format);

struct ParseResult {
  std::vector<Trajectory> trajectories;
  std::size_t skipped = 0;  // malformed records that were dropped
};

// Parses a dataset file. For geolife_plt, `path` may also be a directory,
// in which case every *.plt below it is read in lexicographic path order.
// Throws kIo when the file cannot be read and kBadInput when nothing parses.
ParseResult ParseDataset(const std::filesystem::path& path, DatasetFormat format);

// Stream-level parsers. These never throw on malformed records; they count
// them in ParseResult::skipped instead.
ParseResult ParseCanonicalJsonl(std::istream& in);
ParseResult ParsePortoCsv(std::istream& in);
// One PLT file; `id` is the file stem. An empty trajectory counts as skipped.
ParseResult ParseGeolifePlt(std::istream& in, const std::string& id);

// Checks coordinate ranges and timestamp monotonicity.
bool IsValidTrajectory(const Trajectory& trajectory);

void WriteCanonicalJsonl(std::ostream& out, std::span<const Trajectory> trajectories);

// Keeps trajectories with at least `min_points` points, in input order.
std::vector<Trajectory> FilterByLength(std::vector<Trajectory> trajectories,
                                       std::size_t min_points);

struct GridSpec {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double cell_size_m = 50.0;
};

// Grid anchored at the south-west corner of the dataset bounding box.
GridSpec MakeGridSpec(std::span<const Trajectory> trajectories,
                      double cell_size_m = 50.0);

struct GridCell {
  std::int64_t col = 0;
  std::int64_t row = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GriddedTrajectory {
  std::string id;
  std::vector<GridCell> cells;
  PointSequence centroids;  // cell centers, meters east/north of the origin
};

// Equirectangular projection relative to the grid origin, in meters.
Point2 ProjectToMeters(const GridSpec& spec, double lon, double lat);

// Maps every point to its cell, collapsing consecutive repeats.
std::vector<GriddedTrajectory> GridTrajectories(
    std::span<const Trajectory> trajectories, const GridSpec& spec);

}  // namespace trajsim

#endif  // TRAJSIM_INGEST_H_

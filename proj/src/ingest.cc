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

#include "trajsim/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "json.hpp"

namespace trajsim {
namespace {

using nlohmann::json;

constexpr double kMetersPerDegreeLon = 111320.0;  // at the equator
constexpr double kMetersPerDegreeLat = 110540.0;
// Geolife day counts start at 1899-12-30; the Unix epoch is day 25569.
constexpr double kExcelDaysAtUnixEpoch = 25569.0;
constexpr int kGeolifeHeaderLines = 6;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// Splits one CSV record, honoring double-quoted fields with "" escapes.
std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::optional<std::vector<RawPoint>> PointsFromJson(const json& array) {
  if (!array.is_array() || array.empty()) return std::nullopt;
  std::vector<RawPoint> points;
  points.reserve(array.size());
  for (const json& p : array) {
    if (!p.is_array() || p.size() < 2 || p.size() > 3) return std::nullopt;
    for (const json& v : p) {
      if (!v.is_number()) return std::nullopt;
    }
    RawPoint point{p[0].get<double>(), p[1].get<double>(), std::nullopt};
    if (p.size() == 3) point.t = p[2].get<double>();
    points.push_back(point);
  }
  return points;
}

}  // namespace

DatasetFormat ParseDatasetFormat(std::string_view tag) {
  if (tag == "porto_csv") return DatasetFormat::kPortoCsv;
  if (tag == "geolife_plt") return DatasetFormat::kGeolifePlt;
  if (tag == "canonical_jsonl") return DatasetFormat::kCanonicalJsonl;
  ThrowBadInput("unknown dataset format: " + std::string(tag));
}

std::string_view DatasetFormatName(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kPortoCsv:
      return "porto_csv";
    case DatasetFormat::kGeolifePlt:
      return "geolife_plt";
    case DatasetFormat::kCanonicalJsonl:
      return "canonical_jsonl";
  }
  return "unknown";
}

bool IsValidTrajectory(const Trajectory& trajectory) {
  if (trajectory.points.empty()) return false;
  const bool timed = trajectory.points.front().t.has_value();
  double last_t = -std::numeric_limits<double>::infinity();
  for (const RawPoint& p : trajectory.points) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) return false;
    if (p.lon < -180.0 || p.lon > 180.0 || p.lat < -90.0 || p.lat > 90.0) return false;
    // Timestamps are all-or-nothing within one trajectory.
    if (p.t.has_value() != timed) return false;
    if (timed) {
      if (!std::isfinite(*p.t) || *p.t < last_t) return false;
      last_t = *p.t;
    }
  }
  return true;
}

ParseResult ParseCanonicalJsonl(std::istream& in) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
        !record["id"].is_string() || !record.contains("points")) {
      ++result.skipped;
      continue;
    }
    auto points = PointsFromJson(record["points"]);
    Trajectory trajectory{record["id"].get<std::string>(), {}};
    if (points) trajectory.points = std::move(*points);
    if (!points || !IsValidTrajectory(trajectory)) {
      ++result.skipped;
      continue;
    }
    result.trajectories.push_back(std::move(trajectory));
  }
  return result;
}

ParseResult ParsePortoCsv(std::istream& in) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) return result;

  const std::vector<std::string> header = SplitCsv(line);
  std::size_t id_col = 0;
  std::size_t polyline_col = header.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = Trim(header[c]);
    if (name == "TRIP_ID") id_col = c;
    if (name == "POLYLINE") polyline_col = c;
  }

  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsv(line);
    if (fields.size() != header.size()) {
      ++result.skipped;
      continue;
    }
    const json polyline =
        json::parse(fields[polyline_col], nullptr, /*allow_exceptions=*/false);
    auto points = PointsFromJson(polyline);
    Trajectory trajectory{std::string(Trim(fields[id_col])), {}};
    if (points) trajectory.points = std::move(*points);
    if (!points || trajectory.id.empty() || !IsValidTrajectory(trajectory)) {
      ++result.skipped;
      continue;
    }
    result.trajectories.push_back(std::move(trajectory));
  }
  return result;
}

ParseResult ParseGeolifePlt(std::istream& in, const std::string& id) {
  ParseResult result;
  std::string line;
  for (int i = 0; i < kGeolifeHeaderLines && std::getline(in, line); ++i) {
  }

  Trajectory trajectory{id, {}};
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsv(line);
    std::optional<double> lat, lon, days;
    if (fields.size() >= 5) {
      lat = ParseDouble(fields[0]);
      lon = ParseDouble(fields[1]);
      days = ParseDouble(fields[4]);
    }
    if (!lat || !lon || !days) {
      ++result.skipped;
      continue;
    }
    trajectory.points.push_back(
        RawPoint{*lon, *lat, (*days - kExcelDaysAtUnixEpoch) * 86400.0});
  }
  if (IsValidTrajectory(trajectory)) {
    result.trajectories.push_back(std::move(trajectory));
  } else {
    ++result.skipped;
  }
  return result;
}

ParseResult ParseDataset(const std::filesystem::path& path, DatasetFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(path, ec)) ThrowIo("no such file: " + path.string());

  ParseResult result;
  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) ThrowIo("cannot read " + p.string());
    return in;
  };

  if (format == DatasetFormat::kGeolifePlt) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".plt") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    for (const fs::path& file : files) {
      std::ifstream in = open(file);
      ParseResult one = ParseGeolifePlt(in, file.stem().string());
      result.skipped += one.skipped;
      for (Trajectory& t : one.trajectories) result.trajectories.push_back(std::move(t));
    }
  } else {
    std::ifstream in = open(path);
    result = format == DatasetFormat::kPortoCsv ? ParsePortoCsv(in)
                                                : ParseCanonicalJsonl(in);
    if (in.bad()) ThrowIo("read error on " + path.string());
  }

  if (result.trajectories.empty()) {
    ThrowBadInput("zero trajectories parsed from " + path.string() + " (" +
                  std::to_string(result.skipped) + " malformed records)");
  }
  return result;
}

void WriteCanonicalJsonl(std::ostream& out, std::span<const Trajectory> trajectories) {
  for (const Trajectory& trajectory : trajectories) {
    json points = json::array();
    for (const RawPoint& p : trajectory.points) {
      json point = {p.lon, p.lat};
      if (p.t) point.push_back(*p.t);
      points.push_back(std::move(point));
    }
    out << json{{"id", trajectory.id}, {"points", std::move(points)}}.dump() << '\n';
  }
}

std::vector<Trajectory> FilterByLength(std::vector<Trajectory> trajectories,
                                       std::size_t min_points) {
  if (min_points < 1) ThrowBadInput("min_points must be >= 1");
  std::erase_if(trajectories, [min_points](const Trajectory& t) {
    return t.points.size() < min_points;
  });
  return trajectories;
}

GridSpec MakeGridSpec(std::span<const Trajectory> trajectories, double cell_size_m) {
  GridSpec spec;
  spec.cell_size_m = cell_size_m;
  spec.origin_lon = std::numeric_limits<double>::infinity();
  spec.origin_lat = std::numeric_limits<double>::infinity();
  for (const Trajectory& t : trajectories) {
    for (const RawPoint& p : t.points) {
      spec.origin_lon = std::min(spec.origin_lon, p.lon);
      spec.origin_lat = std::min(spec.origin_lat, p.lat);
    }
  }
  if (!std::isfinite(spec.origin_lon)) ThrowBadInput("cannot grid an empty dataset");
  return spec;
}

Point2 ProjectToMeters(const GridSpec& spec, double lon, double lat) {
  const double cos_lat = std::cos(spec.origin_lat * std::numbers::pi / 180.0);
  return {(lon - spec.origin_lon) * cos_lat * kMetersPerDegreeLon,
          (lat - spec.origin_lat) * kMetersPerDegreeLat};
}

std::vector<GriddedTrajectory> GridTrajectories(
    std::span<const Trajectory> trajectories, const GridSpec& spec) {
  if (!(spec.cell_size_m > 0.0) || !std::isfinite(spec.cell_size_m)) {
    ThrowBadInput("grid cell size must be positive");
  }
  if (trajectories.empty()) ThrowBadInput("cannot grid an empty dataset");

  constexpr double kMaxIndex = 9.0e15;
  std::vector<GriddedTrajectory> out;
  out.reserve(trajectories.size());
  for (const Trajectory& trajectory : trajectories) {
    GriddedTrajectory gridded{trajectory.id, {}, {}};
    for (const RawPoint& p : trajectory.points) {
      const Point2 m = ProjectToMeters(spec, p.lon, p.lat);
      const double col = std::floor(m.x / spec.cell_size_m);
      const double row = std::floor(m.y / spec.cell_size_m);
      if (col < 0.0 || row < 0.0) {
        ThrowBadInput("trajectory " + trajectory.id +
                      " has a point south or west of the grid origin");
      }
      if (col > kMaxIndex || row > kMaxIndex) {
        ThrowBadInput("grid index overflow in trajectory " + trajectory.id);
      }
      const GridCell cell{static_cast<std::int64_t>(col), static_cast<std::int64_t>(row)};
      if (!gridded.cells.empty() && gridded.cells.back() == cell) continue;
      gridded.cells.push_back(cell);
      gridded.centroids.push_back(
          {(static_cast<double>(cell.col) + 0.5) * spec.cell_size_m,
           (static_cast<double>(cell.row) + 0.5) * spec.cell_size_m});
    }
    out.push_back(std::move(gridded));
  }
  return out;
}

}  // namespace trajsim

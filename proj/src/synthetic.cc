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

#include "trajsim/synthetic.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace trajsim {

std::vector<Trajectory> MakeClusteredDataset(const ClusteredDatasetSpec& spec) {
  constexpr double kPi = std::numbers::pi;
  const double meters_per_lon = 111320.0 * std::cos(spec.origin_lat * kPi / 180.0);
  const double meters_per_lat = 110540.0;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.gps_noise_m);
  std::normal_distribution<double> heading_noise(0.0, spec.heading_jitter_rad);

  std::vector<Trajectory> out;
  out.reserve(spec.clusters * spec.per_cluster);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    // Centers on a ring so every pair of clusters is cluster_spacing_m apart
    // for three clusters and at least that far for more.
    const double angle = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(spec.clusters);
    const double ring = spec.clusters > 1
                            ? spec.cluster_spacing_m / (2.0 * std::sin(kPi / spec.clusters))
                            : 0.0;
    const double cx = ring * (1.0 + std::cos(angle));
    const double cy = ring * (1.0 + std::sin(angle));
    const double bearing = angle + kPi / 4.0;

    for (std::size_t t = 0; t < spec.per_cluster; ++t) {
      const double r = spec.cluster_radius_m * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      double x = cx + r * std::cos(phi);
      double y = cy + r * std::sin(phi);
      const double heading = bearing + heading_noise(rng);

      char id[32];
      std::snprintf(id, sizeof(id), "c%zu_%04zu", c, t);
      Trajectory trajectory{id, {}};
      trajectory.points.reserve(spec.points);
      for (std::size_t p = 0; p < spec.points; ++p) {
        const double px = x + noise(rng);
        const double py = y + noise(rng);
        trajectory.points.push_back({spec.origin_lon + px / meters_per_lon,
                                     spec.origin_lat + py / meters_per_lat,
                                     1.4e9 + 15.0 * static_cast<double>(p)});
        x += spec.step_m * std::cos(heading);
        y += spec.step_m * std::sin(heading);
      }
      out.push_back(std::move(trajectory));
    }
  }
  return out;
}

}  // namespace trajsim

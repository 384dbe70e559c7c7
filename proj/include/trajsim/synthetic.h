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

// Seeded synthetic GPS datasets for tests and demos.

#ifndef TRAJSIM_SYNTHETIC_H_
#define TRAJSIM_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "trajsim/ingest.h"

namespace trajsim {

// Straight-ish drives grouped around well-separated cluster centers.
// Each trajectory starts at a uniform offset inside its cluster's disk,
// heads roughly along the cluster's bearing and carries small GPS noise.
struct ClusteredDatasetSpec {
  std::size_t clusters = 3;
  std::size_t per_cluster = 100;
  std::size_t points = 60;
  double cluster_spacing_m = 30000.0;  // between neighboring cluster centers
  double cluster_radius_m = 3000.0;    // start-offset disk radius
  double step_m = 60.0;                // mean spacing of consecutive fixes
  double heading_jitter_rad = 0.15;
  double gps_noise_m = 5.0;
  double origin_lon = -8.61;
  double origin_lat = 41.15;
  std::uint64_t seed = 7;
};

// IDs are "c<cluster>_<index>" with zero padding, so ID order follows
// generation order. Timestamps advance 15 s per fix.
std::vector<Trajectory> MakeClusteredDataset(const ClusteredDatasetSpec& spec);

}  // namespace trajsim

#endif  // TRAJSIM_SYNTHETIC_H_

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

// Staged pipeline: preprocess -> distances -> build-graph -> train, with
// search and evaluate over the trained embeddings. Every stage reads and
// writes files in PipelineConfig::out_dir and records its config in a
// "<artifact>.config.json" sidecar.

#ifndef TRAJSIM_PIPELINE_H_
#define TRAJSIM_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajsim/distance.h"
#include "trajsim/graph.h"
#include "trajsim/ingest.h"
#include "trajsim/search_eval.h"
#include "trajsim/train.h"

namespace trajsim {

struct PipelineConfig {
  std::filesystem::path input_path;
  DatasetFormat input_format = DatasetFormat::kCanonicalJsonl;
  std::size_t min_points = 50;
  // Apply min_points to the gridded (deduplicated) length instead of the raw one.
  bool filter_after_grid = false;
  double cell_size_m = 50.0;
  DistanceKind distance = DistanceKind::kFrechet;
  std::size_t layers = 3;
  double c0_percentile = 10.0;
  std::size_t mid_dim = 256;
  std::size_t out_dim = 128;
  bool use_edge_weights = true;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  std::size_t epochs = 6;
  std::size_t steps_per_epoch = 400;
  std::size_t lr_step_epochs = 5;
  double lr_gamma = 0.1;
  std::uint64_t seed = 42;
  bool single_scale = false;
  bool no_sequential_connection = false;
  // Evaluate on this seeded fraction of trajectories; 1 is leave-one-out
  // over the whole set.
  double query_fraction = 1.0;
  unsigned workers = 1;
  std::filesystem::path out_dir = "out";

  std::size_t effective_layers() const { return single_scale ? 1 : layers; }
  ModelConfig model_config() const;
  TrainConfig train_config() const;
};

// Overlays the keys of a JSON object onto `config`. Unknown keys and
// ill-typed values throw kBadInput.
void ApplyConfigJson(const nlohmann::json& json, PipelineConfig& config);
PipelineConfig LoadConfigFile(const std::filesystem::path& path);
// Every field except the machine-local ones (workers, out_dir).
nlohmann::ordered_json ConfigToJson(const PipelineConfig& config);

// Artifact file names inside out_dir.
inline constexpr const char* kTrajectoriesFile = "trajectories.jsonl";
inline constexpr const char* kRawMatrixFile = "raw.tsm";
inline constexpr const char* kNormalizedMatrixFile = "normalized.tsm";
inline constexpr const char* kGraphFile = "graph.tsg";
inline constexpr const char* kModelFile = "model.tsn";
inline constexpr const char* kEmbeddingFile = "embeddings.tse";
inline constexpr const char* kLossHistoryFile = "loss_history.csv";
inline constexpr const char* kReportFile = "report.json";

// Progress sink for human-readable stage messages.
using Logger = std::function<void(const std::string&)>;

struct PreprocessSummary {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::size_t kept = 0;
  GridSpec grid;
};

struct PreprocessedTrajectory {
  std::string id;
  std::vector<RawPoint> points;
  std::vector<GridCell> cells;
  PointSequence centroids;
};

PreprocessSummary RunPreprocess(const PipelineConfig& config, const Logger& log = {});

// Reads the preprocess output. Records without centroids are gridded with
// config.cell_size_m on the fly.
std::vector<PreprocessedTrajectory> ReadPreprocessed(const std::filesystem::path& path,
                                                     double cell_size_m);

struct DistanceSummary {
  std::size_t n = 0;
  double scale_divisor = 0.0;
  double seconds = 0.0;
};
DistanceSummary RunDistances(const PipelineConfig& config, const Logger& log = {});

struct GraphSummary {
  std::vector<double> thresholds;
  std::vector<std::size_t> edges_per_layer;
  double fraction_above_top = 0.0;
  bool degenerate = false;
  CoverageReport coverage;
};
GraphSummary RunBuildGraph(const PipelineConfig& config, const Logger& log = {});

struct TrainSummary {
  std::vector<double> loss_history;
};
TrainSummary RunTrain(const PipelineConfig& config, const Logger& log = {});

std::vector<std::string> RunSearch(const PipelineConfig& config, const std::string& query_id,
                                   std::size_t k);

// Writes report.json. When `custom` holds (N, K), an extra "R<N>@<K>" entry
// is added.
nlohmann::ordered_json RunEvaluate(
    const PipelineConfig& config,
    std::optional<std::pair<std::size_t, std::size_t>> custom = std::nullopt,
    const Logger& log = {});

// All stages in order; returns the evaluation report.
nlohmann::ordered_json RunPipeline(const PipelineConfig& config, const Logger& log = {});

}  // namespace trajsim

#endif  // TRAJSIM_PIPELINE_H_

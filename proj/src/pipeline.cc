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

#include "trajsim/pipeline.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "trajsim/embedding.h"
#include "trajsim/gnn.h"
#include "trajsim/graph.h"

namespace trajsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void Log(const Logger& log, const std::string& message) {
  if (log) log(message);
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

template <typename T>
T Get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    ThrowBadInput("config key '" + key + "' has the wrong type");
  }
}

std::size_t GetCount(const json& value, const std::string& key) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
    ThrowBadInput("config key '" + key + "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

void EnsureOutDir(const PipelineConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) ThrowIo("cannot create output directory " + config.out_dir.string());
}

fs::path Artifact(const PipelineConfig& config, const char* name) {
  return config.out_dir / name;
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowIo("cannot open for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) ThrowIo("write failed: " + path.string());
}

void WriteSidecar(const fs::path& artifact, const std::string& stage,
                  const PipelineConfig& config, ordered_json details = ordered_json::object()) {
  ordered_json sidecar;
  sidecar["stage"] = stage;
  sidecar["config"] = ConfigToJson(config);
  sidecar["details"] = std::move(details);
  WriteTextFile(artifact.string() + ".config.json", sidecar.dump(2) + "\n");
}

void RequireFile(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    ThrowIo("missing " + path.string() + " (run '" + producer + "' first)");
  }
}

std::vector<std::string> IdsOf(const std::vector<PreprocessedTrajectory>& trajectories) {
  std::vector<std::string> ids;
  ids.reserve(trajectories.size());
  for (const auto& t : trajectories) ids.push_back(t.id);
  return ids;
}

}  // namespace

ModelConfig PipelineConfig::model_config() const {
  ModelConfig model;
  model.num_layers = effective_layers();
  model.hidden_dim = mid_dim;
  model.output_dim = out_dim;
  model.sequential = !no_sequential_connection;
  model.use_edge_weights = use_edge_weights;
  model.seed = seed;
  return model;
}

TrainConfig PipelineConfig::train_config() const {
  TrainConfig train;
  train.epochs = epochs;
  train.steps_per_epoch = steps_per_epoch;
  train.learning_rate = learning_rate;
  train.optimizer = optimizer;
  train.lr_step_epochs = lr_step_epochs;
  train.lr_gamma = lr_gamma;
  return train;
}

void ApplyConfigJson(const json& object, PipelineConfig& c) {
  if (!object.is_object()) ThrowBadInput("config must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (key == "input_path") {
      c.input_path = Get<std::string>(value, key);
    } else if (key == "input_format") {
      c.input_format = ParseDatasetFormat(Get<std::string>(value, key));
    } else if (key == "min_points") {
      c.min_points = GetCount(value, key);
    } else if (key == "filter_after_grid") {
      c.filter_after_grid = Get<bool>(value, key);
    } else if (key == "cell_size_m") {
      c.cell_size_m = Get<double>(value, key);
    } else if (key == "distance") {
      c.distance = ParseDistanceKind(Get<std::string>(value, key));
    } else if (key == "layers") {
      c.layers = GetCount(value, key);
    } else if (key == "c0_percentile") {
      c.c0_percentile = Get<double>(value, key);
    } else if (key == "mid_dim") {
      c.mid_dim = GetCount(value, key);
    } else if (key == "out_dim") {
      c.out_dim = GetCount(value, key);
    } else if (key == "use_edge_weights") {
      c.use_edge_weights = Get<bool>(value, key);
    } else if (key == "optimizer") {
      c.optimizer = ParseOptimizerKind(Get<std::string>(value, key));
    } else if (key == "learning_rate") {
      c.learning_rate = Get<double>(value, key);
    } else if (key == "epochs") {
      c.epochs = GetCount(value, key);
    } else if (key == "steps_per_epoch") {
      c.steps_per_epoch = GetCount(value, key);
    } else if (key == "lr_step_epochs") {
      c.lr_step_epochs = GetCount(value, key);
    } else if (key == "lr_gamma") {
      c.lr_gamma = Get<double>(value, key);
    } else if (key == "seed") {
      c.seed = Get<std::uint64_t>(value, key);
    } else if (key == "single_scale") {
      c.single_scale = Get<bool>(value, key);
    } else if (key == "no_sequential_connection") {
      c.no_sequential_connection = Get<bool>(value, key);
    } else if (key == "query_fraction") {
      c.query_fraction = Get<double>(value, key);
    } else if (key == "workers") {
      c.workers = static_cast<unsigned>(GetCount(value, key));
    } else if (key == "out_dir") {
      c.out_dir = Get<std::string>(value, key);
    } else {
      ThrowBadInput("unknown config key: " + key);
    }
  }
}

PipelineConfig LoadConfigFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot read config " + path.string());
  const json object = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (object.is_discarded()) ThrowBadInput("config is not valid JSON: " + path.string());
  PipelineConfig config;
  ApplyConfigJson(object, config);
  return config;
}

ordered_json ConfigToJson(const PipelineConfig& c) {
  ordered_json j;
  j["input_path"] = c.input_path.string();
  j["input_format"] = std::string(DatasetFormatName(c.input_format));
  j["min_points"] = c.min_points;
  j["filter_after_grid"] = c.filter_after_grid;
  j["cell_size_m"] = c.cell_size_m;
  j["distance"] = std::string(DistanceKindName(c.distance));
  j["layers"] = c.layers;
  j["c0_percentile"] = c.c0_percentile;
  j["mid_dim"] = c.mid_dim;
  j["out_dim"] = c.out_dim;
  j["use_edge_weights"] = c.use_edge_weights;
  j["optimizer"] = std::string(OptimizerKindName(c.optimizer));
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["steps_per_epoch"] = c.steps_per_epoch;
  j["lr_step_epochs"] = c.lr_step_epochs;
  j["lr_gamma"] = c.lr_gamma;
  j["seed"] = c.seed;
  j["single_scale"] = c.single_scale;
  j["no_sequential_connection"] = c.no_sequential_connection;
  j["query_fraction"] = c.query_fraction;
  return j;
}

PreprocessSummary RunPreprocess(const PipelineConfig& config, const Logger& log) {
  EnsureOutDir(config);
  ParseResult parsed = ParseDataset(config.input_path, config.input_format);
  PreprocessSummary summary;
  summary.parsed = parsed.trajectories.size();
  summary.skipped = parsed.skipped;
  if (parsed.skipped > 0) {
    Log(log, "warning: skipped " + std::to_string(parsed.skipped) + " malformed records");
  }

  std::vector<Trajectory> kept =
      config.filter_after_grid ? std::move(parsed.trajectories)
                               : FilterByLength(std::move(parsed.trajectories),
                                                config.min_points);
  if (kept.empty()) ThrowBadInput("zero trajectories survive the length filter");
  summary.grid = MakeGridSpec(kept, config.cell_size_m);
  std::vector<GriddedTrajectory> gridded = GridTrajectories(kept, summary.grid);

  std::ostringstream out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (config.filter_after_grid && gridded[i].cells.size() < config.min_points) continue;
    ordered_json record;
    record["id"] = kept[i].id;
    json points = json::array();
    for (const RawPoint& p : kept[i].points) {
      json point = {p.lon, p.lat};
      if (p.t) point.push_back(*p.t);
      points.push_back(std::move(point));
    }
    record["points"] = std::move(points);
    json cells = json::array();
    json centroids = json::array();
    for (std::size_t k = 0; k < gridded[i].cells.size(); ++k) {
      cells.push_back({gridded[i].cells[k].col, gridded[i].cells[k].row});
      centroids.push_back({gridded[i].centroids[k].x, gridded[i].centroids[k].y});
    }
    record["cells"] = std::move(cells);
    record["centroids"] = std::move(centroids);
    out << record.dump() << '\n';
    ++summary.kept;
  }
  if (summary.kept == 0) ThrowBadInput("zero trajectories survive the length filter");

  const fs::path path = Artifact(config, kTrajectoriesFile);
  WriteTextFile(path, out.str());
  ordered_json details;
  details["parsed"] = summary.parsed;
  details["skipped_malformed"] = summary.skipped;
  details["kept"] = summary.kept;
  details["grid_origin_lon"] = summary.grid.origin_lon;
  details["grid_origin_lat"] = summary.grid.origin_lat;
  details["projection"] = "equirectangular";
  WriteSidecar(path, "preprocess", config, std::move(details));
  Log(log, "preprocess: parsed " + std::to_string(summary.parsed) + ", kept " +
               std::to_string(summary.kept) + " -> " + path.string());
  return summary;
}

std::vector<PreprocessedTrajectory> ReadPreprocessed(const fs::path& path,
                                                     double cell_size_m) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot read " + path.string());
  std::vector<PreprocessedTrajectory> out;
  std::vector<Trajectory> needs_grid;
  std::vector<std::size_t> needs_grid_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (record.is_discarded() || !record.is_object()) ThrowBadInput("bad record at " + where);

    std::istringstream one(line);
    ParseResult parsed = ParseCanonicalJsonl(one);
    if (parsed.trajectories.size() != 1) ThrowBadInput("bad trajectory at " + where);
    PreprocessedTrajectory t;
    t.id = parsed.trajectories[0].id;
    t.points = std::move(parsed.trajectories[0].points);
    if (record.contains("centroids")) {
      try {
        for (const json& c : record.at("centroids")) {
          t.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        }
        for (const json& c : record.value("cells", json::array())) {
          t.cells.push_back({c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>()});
        }
      } catch (const json::exception&) {
        ThrowBadInput("bad centroids at " + where);
      }
      if (t.centroids.empty()) ThrowBadInput("empty centroids at " + where);
    } else {
      needs_grid.push_back({t.id, t.points});
      needs_grid_index.push_back(out.size());
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) ThrowBadInput("zero trajectories in " + path.string());
  if (!needs_grid.empty()) {
    const GridSpec spec = MakeGridSpec(needs_grid, cell_size_m);
    std::vector<GriddedTrajectory> gridded = GridTrajectories(needs_grid, spec);
    for (std::size_t k = 0; k < gridded.size(); ++k) {
      out[needs_grid_index[k]].cells = std::move(gridded[k].cells);
      out[needs_grid_index[k]].centroids = std::move(gridded[k].centroids);
    }
  }
  return out;
}

DistanceSummary RunDistances(const PipelineConfig& config, const Logger& log) {
  EnsureOutDir(config);
  const fs::path input = Artifact(config, kTrajectoriesFile);
  RequireFile(input, "preprocess");
  const std::vector<PreprocessedTrajectory> trajectories =
      ReadPreprocessed(input, config.cell_size_m);
  if (trajectories.size() < 2) ThrowBadInput("need at least 2 trajectories for distances");

  std::vector<PointSequence> sequences;
  sequences.reserve(trajectories.size());
  for (const auto& t : trajectories) sequences.push_back(t.centroids);

  Log(log, "distances: " + std::to_string(sequences.size() * (sequences.size() - 1) / 2) +
               " " + std::string(DistanceKindName(config.distance)) + " pairs on " +
               std::to_string(std::max(1u, config.workers)) + " worker(s)");
  const auto start = std::chrono::steady_clock::now();
  const RawDistanceMatrix raw =
      ComputeRawDistanceMatrix(sequences, config.distance, config.workers);
  const DistanceMatrix normalized = NormalizeDistances(raw);
  DistanceSummary summary;
  summary.n = raw.n();
  summary.scale_divisor = normalized.scale_divisor;
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path raw_path = Artifact(config, kRawMatrixFile);
  const fs::path norm_path = Artifact(config, kNormalizedMatrixFile);
  WriteMatrixFile(raw_path, raw);
  WriteMatrixFile(norm_path, normalized);
  ordered_json details;
  details["n"] = summary.n;
  details["units"] = "meters";
  details["scale_divisor"] = summary.scale_divisor;
  WriteSidecar(raw_path, "distances", config, details);
  details["units"] = "dimensionless";
  WriteSidecar(norm_path, "distances", config, details);
  Log(log, "distances: n=" + std::to_string(summary.n) + ", median " +
               Fixed(summary.scale_divisor, 2) + " m, " + Fixed(summary.seconds, 2) + " s");
  return summary;
}

GraphSummary RunBuildGraph(const PipelineConfig& config, const Logger& log) {
  EnsureOutDir(config);
  const fs::path input = Artifact(config, kNormalizedMatrixFile);
  RequireFile(input, "distances");
  const DistanceMatrix d = ReadNormalizedMatrixFile(input);
  const ThresholdChoice choice =
      ChooseThresholds(d, config.effective_layers(), config.c0_percentile);
  const MultiScaleGraph graph = BuildGraph(d, choice.thresholds);

  GraphSummary summary;
  summary.thresholds = choice.thresholds.c;
  summary.fraction_above_top = choice.fraction_above_top;
  summary.degenerate = choice.degenerate;
  for (const GraphLayer& layer : graph.layers) summary.edges_per_layer.push_back(layer.edges.size());
  summary.coverage = CoverageCheck(graph, d);

  if (choice.degenerate) Log(log, "warning: all pairwise distances are (nearly) identical");
  if (choice.fraction_above_top > 0.0) {
    Log(log, "warning: " + Fixed(100.0 * choice.fraction_above_top, 2) +
                 "% of pairs lie above c_m and get no edge");
  }

  const fs::path path = Artifact(config, kGraphFile);
  WriteGraphFile(path, graph);
  ordered_json details;
  details["symmetrization"] = "arithmetic_mean";
  details["bands"] = "half_open";
  details["thresholds"] = summary.thresholds;
  details["edges_per_layer"] = summary.edges_per_layer;
  details["fraction_above_top"] = summary.fraction_above_top;
  details["degenerate"] = summary.degenerate;
  details["coverage_violations"] = summary.coverage.violations;
  details["coverage_top_layer_escapes"] = summary.coverage.top_layer_escapes;
  WriteSidecar(path, "build-graph", config, std::move(details));

  std::string layers;
  for (std::size_t count : summary.edges_per_layer) {
    layers += (layers.empty() ? "" : "/") + std::to_string(count);
  }
  Log(log, "build-graph: m=" + std::to_string(graph.num_layers()) + ", edges " + layers +
               ", coverage violations " + std::to_string(summary.coverage.violations));
  return summary;
}

TrainSummary RunTrain(const PipelineConfig& config, const Logger& log) {
  EnsureOutDir(config);
  const fs::path graph_path = Artifact(config, kGraphFile);
  const fs::path norm_path = Artifact(config, kNormalizedMatrixFile);
  const fs::path traj_path = Artifact(config, kTrajectoriesFile);
  RequireFile(graph_path, "build-graph");
  RequireFile(norm_path, "distances");
  RequireFile(traj_path, "preprocess");

  MultiScaleGraph graph = ReadGraphFile(graph_path);
  const DistanceMatrix d = ReadNormalizedMatrixFile(norm_path);
  graph.node_ids = IdsOf(ReadPreprocessed(traj_path, config.cell_size_m));
  if (graph.node_ids.size() != graph.n() || d.n() != graph.n()) {
    ThrowBadInput("trajectories, distances and graph disagree on the trajectory count");
  }

  InitializedModel init = InitModel(graph, config.model_config());
  const TrainResult result =
      Train(init.model, graph, init.input, d, config.train_config(),
            [&](std::size_t epoch, double loss, double lr) {
              Log(log, "train: epoch " + std::to_string(epoch + 1) + " loss " +
                           Fixed(loss, 6) + " lr " + std::to_string(lr));
            });

  const fs::path model_path = Artifact(config, kModelFile);
  const fs::path emb_path = Artifact(config, kEmbeddingFile);
  const fs::path loss_path = Artifact(config, kLossHistoryFile);
  WriteModelFile(model_path, init.model, init.input);
  WriteEmbeddingFile(emb_path, result.embeddings);
  std::string csv = "epoch,learning_rate,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    char row[96];
    std::snprintf(row, sizeof(row), "%zu,%.17g,%.17g\n", e + 1,
                  StepDecayLearningRate(config.train_config(), e), result.loss_history[e]);
    csv += row;
  }
  WriteTextFile(loss_path, csv);

  ordered_json details;
  details["n"] = graph.n();
  details["layers"] = graph.num_layers();
  details["final_loss"] = result.loss_history.empty() ? 1.0 : result.loss_history.back();
  WriteSidecar(model_path, "train", config, details);
  WriteSidecar(emb_path, "train", config, details);
  WriteSidecar(loss_path, "train", config, details);
  return {result.loss_history};
}

std::vector<std::string> RunSearch(const PipelineConfig& config, const std::string& query_id,
                                   std::size_t k) {
  const fs::path path = Artifact(config, kEmbeddingFile);
  RequireFile(path, "train");
  return KnnSearch(ReadEmbeddingFile(path), query_id, k);
}

ordered_json RunEvaluate(const PipelineConfig& config,
                         std::optional<std::pair<std::size_t, std::size_t>> custom,
                         const Logger& log) {
  EnsureOutDir(config);
  const fs::path emb_path = Artifact(config, kEmbeddingFile);
  const fs::path raw_path = Artifact(config, kRawMatrixFile);
  RequireFile(emb_path, "train");
  RequireFile(raw_path, "distances");
  const EmbeddingSet embeddings = ReadEmbeddingFile(emb_path);
  const RawDistanceMatrix raw = ReadRawMatrixFile(raw_path);
  if (embeddings.size() != raw.n()) {
    ThrowBadInput("embeddings and raw distance matrix disagree on the trajectory count");
  }

  std::vector<std::uint32_t> queries;
  if (config.query_fraction < 1.0) {
    queries = SampleQueryRows(raw.n(), config.query_fraction, config.seed);
  }
  const EvaluationReport report = Evaluate(embeddings, raw, config.seed, queries);
  ordered_json out = ordered_json::parse(EvaluationReportJson(report));
  if (custom) {
    const auto [top_n, top_k] = *custom;
    const GroundTruth truth = GroundTruthTopN(raw, embeddings.ids, top_n, queries);
    const Retrieval retrieval = RetrieveAll(embeddings, top_k, queries);
    out["R" + std::to_string(top_n) + "@" + std::to_string(top_k)] =
        RecallNAtK(retrieval, truth, top_n, top_k);
  }

  const fs::path path = Artifact(config, kReportFile);
  WriteTextFile(path, out.dump(2) + "\n");
  WriteSidecar(path, "evaluate", config);
  Log(log, "evaluate: " + out.dump());
  return out;
}

ordered_json RunPipeline(const PipelineConfig& config, const Logger& log) {
  RunPreprocess(config, log);
  RunDistances(config, log);
  RunBuildGraph(config, log);
  RunTrain(config, log);
  return RunEvaluate(config, std::nullopt, log);
}

}  // namespace trajsim

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

// trajsim command-line driver. Each stage reads and writes artifacts in
// --out-dir; settings come from --config (JSON) with flags taking priority.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "trajsim/common.h"
#include "trajsim/pipeline.h"
#include "trajsim/synthetic.h"

namespace {

using trajsim::PipelineConfig;

// Flag values that override the config file when present.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;

  std::optional<std::string> input;
  std::optional<std::string> format;
  std::optional<std::size_t> min_points;
  bool filter_after_grid = false;
  std::optional<double> cell_size;
  std::optional<std::string> metric;
  std::optional<std::size_t> layers;
  std::optional<double> c0_percentile;
  bool single_scale = false;
  std::optional<std::size_t> mid_dim;
  std::optional<std::size_t> out_dim;
  bool no_sequential_connection = false;
  bool no_edge_weights = false;
  std::optional<std::string> optimizer;
  std::optional<double> learning_rate;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> steps_per_epoch;
  std::optional<double> query_fraction;
};

template <typename T, typename U>
void Set(const std::optional<T>& flag, U& field) {
  if (flag) field = static_cast<U>(*flag);
}

PipelineConfig ResolveConfig(const Overrides& o) {
  PipelineConfig c;
  if (o.config_path) c = trajsim::LoadConfigFile(*o.config_path);
  Set(o.seed, c.seed);
  Set(o.workers, c.workers);
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.input) c.input_path = *o.input;
  if (o.format) c.input_format = trajsim::ParseDatasetFormat(*o.format);
  Set(o.min_points, c.min_points);
  if (o.filter_after_grid) c.filter_after_grid = true;
  Set(o.cell_size, c.cell_size_m);
  if (o.metric) c.distance = trajsim::ParseDistanceKind(*o.metric);
  Set(o.layers, c.layers);
  Set(o.c0_percentile, c.c0_percentile);
  if (o.single_scale) c.single_scale = true;
  Set(o.mid_dim, c.mid_dim);
  Set(o.out_dim, c.out_dim);
  if (o.no_sequential_connection) c.no_sequential_connection = true;
  if (o.no_edge_weights) c.use_edge_weights = false;
  if (o.optimizer) c.optimizer = trajsim::ParseOptimizerKind(*o.optimizer);
  Set(o.learning_rate, c.learning_rate);
  Set(o.epochs, c.epochs);
  Set(o.steps_per_epoch, c.steps_per_epoch);
  Set(o.query_fraction, c.query_fraction);
  return c;
}

void AddStageOptions(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON config file");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--workers", o.workers, "Distance-stage worker threads");
  app.add_option("--out-dir", o.out_dir, "Artifact directory");

  app.add_option("--input", o.input, "Raw dataset path");
  app.add_option("--format", o.format, "porto_csv | geolife_plt | canonical_jsonl");
  app.add_option("--min-points", o.min_points, "Length filter");
  app.add_flag("--filter-after-grid", o.filter_after_grid,
               "Apply the length filter to gridded sequences");
  app.add_option("--cell-size", o.cell_size, "Grid cell size in meters");
  app.add_option("--metric", o.metric, "frechet | hausdorff");
  app.add_option("--layers", o.layers, "Number of graph layers m");
  app.add_option("--c0-percentile", o.c0_percentile, "Percentile for the first threshold");
  app.add_flag("--single-scale", o.single_scale, "Use one graph layer");
  app.add_option("--mid-dim", o.mid_dim, "GNN layer width");
  app.add_option("--out-dim", o.out_dim, "Embedding width");
  app.add_flag("--no-sequential-connection", o.no_sequential_connection,
               "Feed every GNN layer the input features");
  app.add_flag("--no-edge-weights", o.no_edge_weights, "Ignore edge weights in attention");
  app.add_option("--optimizer", o.optimizer, "adam | sgd");
  app.add_option("--lr", o.learning_rate, "Initial learning rate");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--steps-per-epoch", o.steps_per_epoch, "Full-batch steps per epoch");
  app.add_option("--query-fraction", o.query_fraction, "Fraction of rows used as queries");
}

void PrintLog(const std::string& message) { std::cerr << message << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory similarity search with multi-scale graph embeddings"};
  app.require_subcommand(1);
  Overrides overrides;

  CLI::App* preprocess = app.add_subcommand("preprocess", "Parse, filter and grid a dataset");
  CLI::App* distances = app.add_subcommand("distances", "Pairwise raw and normalized distances");
  CLI::App* build_graph = app.add_subcommand("build-graph", "Multi-scale similarity graph");
  CLI::App* train = app.add_subcommand("train", "Train the GNN and write embeddings");
  CLI::App* search = app.add_subcommand("search", "Top-K similar trajectories for an ID");
  CLI::App* evaluate = app.add_subcommand("evaluate", "HR@K and R_N@K report");
  CLI::App* pipeline = app.add_subcommand("pipeline", "Run every stage");
  CLI::App* synth = app.add_subcommand("synth", "Write a clustered synthetic jsonl dataset");

  for (CLI::App* sub : {preprocess, distances, build_graph, train, search, evaluate, pipeline}) {
    AddStageOptions(*sub, overrides);
  }

  std::string query_id;
  std::size_t search_k = 10;
  search->add_option("--id", query_id, "Query trajectory ID")->required();
  search->add_option("-k,--k", search_k, "Number of results");

  std::optional<std::size_t> eval_n;
  std::optional<std::size_t> eval_k;
  evaluate->add_option("--n", eval_n, "Ground-truth depth N for an extra R_N@K entry");
  evaluate->add_option("--k", eval_k, "Retrieval depth K for an extra R_N@K entry");

  trajsim::ClusteredDatasetSpec synth_spec;
  std::string synth_out;
  synth->add_option("--output", synth_out, "Destination jsonl file")->required();
  synth->add_option("--clusters", synth_spec.clusters, "Cluster count");
  synth->add_option("--per-cluster", synth_spec.per_cluster, "Trajectories per cluster");
  synth->add_option("--points", synth_spec.points, "Fixes per trajectory");
  synth->add_option("--seed", synth_spec.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      std::ofstream out(synth_out, std::ios::binary | std::ios::trunc);
      if (!out) trajsim::ThrowIo("cannot open for writing: " + synth_out);
      trajsim::WriteCanonicalJsonl(out, trajsim::MakeClusteredDataset(synth_spec));
      out.flush();
      if (!out) trajsim::ThrowIo("write failed: " + synth_out);
      return 0;
    }

    const PipelineConfig config = ResolveConfig(overrides);
    if (preprocess->parsed()) {
      trajsim::RunPreprocess(config, PrintLog);
    } else if (distances->parsed()) {
      trajsim::RunDistances(config, PrintLog);
    } else if (build_graph->parsed()) {
      trajsim::RunBuildGraph(config, PrintLog);
    } else if (train->parsed()) {
      trajsim::RunTrain(config, PrintLog);
    } else if (search->parsed()) {
      for (const std::string& id : trajsim::RunSearch(config, query_id, search_k)) {
        std::cout << id << '\n';
      }
    } else if (evaluate->parsed()) {
      if (eval_n.has_value() != eval_k.has_value()) {
        trajsim::ThrowBadInput("--n and --k must be given together");
      }
      std::optional<std::pair<std::size_t, std::size_t>> custom;
      if (eval_n) custom.emplace(*eval_n, *eval_k);
      std::cout << trajsim::RunEvaluate(config, custom).dump(2) << '\n';
    } else if (pipeline->parsed()) {
      std::cout << trajsim::RunPipeline(config, PrintLog).dump(2) << '\n';
    }
  } catch (const trajsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(trajsim::ErrorCode::kIo);
  }
  return 0;
}

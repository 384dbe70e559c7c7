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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "trajsim/synthetic.h"

namespace trajsim {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteText(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Porto-style CSV with rows of the given lengths, ~80 m between fixes.
std::string PortoCsv(std::initializer_list<int> lengths) {
  std::ostringstream out;
  out << "\"TRIP_ID\",\"CALL_TYPE\",\"MISSING_DATA\",\"POLYLINE\"\n";
  int row = 0;
  for (int len : lengths) {
    out << "\"T" << row << "\",\"A\",\"False\",\"[";
    for (int p = 0; p < len; ++p) {
      out << (p ? "," : "") << "[" << -8.61 + 0.001 * p << "," << 41.15 + 0.0003 * row << "]";
    }
    out << "]\"\n";
    ++row;
  }
  return out.str();
}

// Quick settings over a small clustered dataset written to `dir`.
PipelineConfig SmallConfig(const fs::path& dir) {
  ClusteredDatasetSpec spec;
  spec.per_cluster = 8;
  std::ofstream out(dir / "input.jsonl", std::ios::binary);
  WriteCanonicalJsonl(out, MakeClusteredDataset(spec));
  out.close();
  PipelineConfig c;
  c.input_path = dir / "input.jsonl";
  c.out_dir = dir / "out";
  c.mid_dim = 12;
  c.out_dim = 6;
  c.epochs = 3;
  c.steps_per_epoch = 4;
  return c;
}

TEST(ConfigTest, JsonOverlayAndErrors) {
  PipelineConfig c;
  ApplyConfigJson(nlohmann::json::parse(R"({"layers": 2, "distance": "hausdorff",
      "learning_rate": 0.01, "single_scale": true, "seed": 7, "workers": 3})"),
                  c);
  EXPECT_EQ(c.layers, 2u);
  EXPECT_EQ(c.distance, DistanceKind::kHausdorff);
  EXPECT_EQ(c.learning_rate, 0.01);
  EXPECT_EQ(c.effective_layers(), 1u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"layres": 2})"), c), Error);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"layers": "two"})"), c), Error);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"layers": -1})"), c), Error);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse("[1]"), c), Error);
}

TEST(ConfigTest, SerializedConfigReplays) {
  PipelineConfig c;
  c.c0_percentile = 12.5;
  c.optimizer = OptimizerKind::kSgd;
  c.no_sequential_connection = true;
  const nlohmann::ordered_json j = ConfigToJson(c);
  EXPECT_FALSE(j.contains("workers"));
  EXPECT_FALSE(j.contains("out_dir"));
  PipelineConfig back;
  ApplyConfigJson(nlohmann::json::parse(j.dump()), back);
  EXPECT_EQ(ConfigToJson(back), j);
}

TEST(PreprocessTest, PortoFixtureDropsShortTrips) {
  const fs::path dir = FreshDir("porto");
  WriteText(dir / "trips.csv", PortoCsv({60, 10, 55, 49, 80}));
  PipelineConfig c;
  c.input_path = dir / "trips.csv";
  c.input_format = DatasetFormat::kPortoCsv;
  c.out_dir = dir / "out";
  const PreprocessSummary s = RunPreprocess(c);
  EXPECT_EQ(s.parsed, 5u);
  EXPECT_EQ(s.kept, 3u);
  const auto trajs = ReadPreprocessed(c.out_dir / kTrajectoriesFile, c.cell_size_m);
  ASSERT_EQ(trajs.size(), 3u);
  EXPECT_EQ(trajs[0].id, "T0");
  EXPECT_EQ(trajs[1].id, "T2");
  EXPECT_EQ(trajs[2].id, "T4");
  EXPECT_EQ(trajs[2].points.size(), 80u);
  EXPECT_EQ(trajs[2].cells.size(), trajs[2].centroids.size());

  const auto sidecar = nlohmann::json::parse(
      Slurp(c.out_dir / (std::string(kTrajectoriesFile) + ".config.json")));
  EXPECT_EQ(sidecar["stage"], "preprocess");
  EXPECT_EQ(sidecar["config"]["min_points"], 50);

  const std::string first = Slurp(c.out_dir / kTrajectoriesFile);
  RunPreprocess(c);
  EXPECT_EQ(Slurp(c.out_dir / kTrajectoriesFile), first);
}

TEST(PreprocessTest, EmptyInputFails) {
  const fs::path dir = FreshDir("empty");
  WriteText(dir / "empty.jsonl", "");
  PipelineConfig c;
  c.input_path = dir / "empty.jsonl";
  c.out_dir = dir / "out";
  try {
    RunPreprocess(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadInput);
    EXPECT_NE(std::string(e.what()).find("zero trajectories"), std::string::npos) << e.what();
  }
  WriteText(dir / "short.csv", PortoCsv({10, 20}));
  c.input_path = dir / "short.csv";
  c.input_format = DatasetFormat::kPortoCsv;
  EXPECT_THROW(RunPreprocess(c), Error);
}

TEST(StagesTest, MissingUpstreamArtifactIsAnIoError) {
  PipelineConfig c;
  c.out_dir = FreshDir("missing") / "out";
  try {
    RunDistances(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(StagesTest, FrechetDominatesHausdorff) {
  const fs::path dir = FreshDir("metrics");
  PipelineConfig c = SmallConfig(dir);
  RunPreprocess(c);
  RunDistances(c);
  const RawDistanceMatrix frechet = ReadRawMatrixFile(c.out_dir / kRawMatrixFile);
  c.distance = DistanceKind::kHausdorff;
  RunDistances(c);
  const RawDistanceMatrix hausdorff = ReadRawMatrixFile(c.out_dir / kRawMatrixFile);
  ASSERT_EQ(frechet.n(), 24u);
  EXPECT_EQ(frechet.kind, DistanceKind::kFrechet);
  EXPECT_EQ(hausdorff.kind, DistanceKind::kHausdorff);
  for (std::size_t i = 0; i < 24; ++i) {
    for (std::size_t j = 0; j < 24; ++j) EXPECT_GE(frechet.values(i, j), hausdorff.values(i, j));
  }
}

TEST(StagesTest, GraphSummaryMatchesTheFile) {
  const fs::path dir = FreshDir("graph");
  PipelineConfig c = SmallConfig(dir);
  RunPreprocess(c);
  RunDistances(c);
  const GraphSummary s = RunBuildGraph(c);
  const MultiScaleGraph g = ReadGraphFile(c.out_dir / kGraphFile);
  const DistanceMatrix d = ReadNormalizedMatrixFile(c.out_dir / kNormalizedMatrixFile);
  ASSERT_EQ(g.num_layers(), 3u);
  std::size_t banded = 0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = i + 1; j < d.n(); ++j) {
      const double v = SymmetrizedDistance(d, i, j);
      banded += v >= g.thresholds.c.front() && v < g.thresholds.c.back();
    }
  }
  std::size_t total = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(s.edges_per_layer[k], g.layers[k].edges.size());
    total += s.edges_per_layer[k];
  }
  EXPECT_EQ(total, banded);
  EXPECT_EQ(s.coverage.violations, 0u);

  c.single_scale = true;
  RunBuildGraph(c);
  EXPECT_EQ(ReadGraphFile(c.out_dir / kGraphFile).num_layers(), 1u);
}

TEST(StagesTest, ZeroLearningRateGivesFlatFiniteHistory) {
  const fs::path dir = FreshDir("flat");
  PipelineConfig c = SmallConfig(dir);
  c.learning_rate = 0.0;
  RunPreprocess(c);
  RunDistances(c);
  RunBuildGraph(c);
  const TrainSummary s = RunTrain(c);
  ASSERT_EQ(s.loss_history.size(), 3u);
  for (double l : s.loss_history) EXPECT_EQ(l, s.loss_history.front());

  std::istringstream csv(Slurp(c.out_dir / kLossHistoryFile));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "epoch,learning_rate,loss");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_TRUE(std::isfinite(std::stod(line.substr(line.rfind(',') + 1))));
  }
  EXPECT_EQ(rows, 3u);
}

TEST(PipelineTest, RerunsAreByteIdentical) {
  const fs::path dir = FreshDir("rerun");
  PipelineConfig c = SmallConfig(dir);
  c.out_dir = dir / "a";
  const auto report_a = RunPipeline(c);
  c.out_dir = dir / "b";
  c.workers = 2;
  const auto report_b = RunPipeline(c);
  EXPECT_EQ(report_a, report_b);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const fs::path other = dir / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(Slurp(entry.path()), Slurp(other)) << entry.path().filename();
    ++compared;
  }
  EXPECT_EQ(compared, 16u);  // 8 artifacts and their sidecars

  EXPECT_EQ(report_a["n"], 24);
  EXPECT_TRUE(report_a["HR@10"].is_number());
  EXPECT_TRUE(report_a["HR@50"].is_null());

  const auto hits = RunSearch(c, "c1_0003", 5);
  EXPECT_EQ(hits.size(), 5u);
  EXPECT_EQ(std::count(hits.begin(), hits.end(), "c1_0003"), 0);
  EXPECT_THROW(RunSearch(c, "nope", 5), Error);

  const auto custom = RunEvaluate(c, std::make_pair(std::size_t{5}, std::size_t{10}));
  EXPECT_TRUE(custom.contains("R5@10"));
}

#ifdef TRAJSIM_CLI_PATH
int RunCli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(TRAJSIM_CLI_PATH) + " " + args + " > " +
                          stdout_file.string() + " 2> " + stdout_file.string() + ".err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodesAndOutputs) {
  const fs::path dir = FreshDir("cli");
  const fs::path log = dir / "stdout.txt";
  const std::string out = " --out-dir " + (dir / "out").string();
  EXPECT_EQ(RunCli("--help", log), 0);
  EXPECT_EQ(RunCli("", log), 2);
  EXPECT_EQ(RunCli("pipeline --bogus-flag", log), 2);
  EXPECT_EQ(RunCli("preprocess --input " + (dir / "absent.jsonl").string() + out, log), 4);
  EXPECT_EQ(RunCli("distances" + out, log), 4);

  const fs::path data = dir / "data.jsonl";
  ASSERT_EQ(RunCli("synth --per-cluster 8 --output " + data.string(), log), 0);
  WriteText(dir / "config.json", R"({"mid_dim": 8, "out_dim": 4, "epochs": 2,
      "steps_per_epoch": 2, "layers": 2, "input_path": ")" + data.string() + "\"}");
  const std::string cfg = " --config " + (dir / "config.json").string();
  ASSERT_EQ(RunCli("pipeline --seed 5" + cfg + out, log), 0);
  const auto report = nlohmann::json::parse(Slurp(log));
  EXPECT_EQ(report["seed"], 5);
  EXPECT_EQ(ReadGraphFile(dir / "out" / kGraphFile).num_layers(), 2u);

  ASSERT_EQ(RunCli("search --id c0_0000 -k 4" + cfg + out, log), 0);
  std::istringstream ids(Slurp(log));
  std::string id;
  std::size_t lines = 0;
  while (std::getline(ids, id)) ++lines;
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(RunCli("search --id missing" + cfg + out, log), 2);
  EXPECT_EQ(RunCli("evaluate --n 5" + cfg + out, log), 2);

  WriteText(dir / "bad.json", R"({"epochz": 3})");
  EXPECT_EQ(RunCli("train --config " + (dir / "bad.json").string() + out, log), 2);
  EXPECT_EQ(RunCli("train --lr 1e300 --optimizer sgd" + cfg + out, log), 3);
}
#endif

}  // namespace
}  // namespace trajsim

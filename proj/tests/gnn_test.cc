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

#include "trajsim/gnn.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace trajsim {
namespace {

MultiScaleGraph MakeGraph(std::size_t n, std::vector<std::vector<Edge>> layers) {
  MultiScaleGraph g;
  g.thresholds = MakeThresholds(0.25, layers.size());
  for (auto& edges : layers) g.layers.push_back(GraphLayer{n, std::move(edges)});
  return g;
}

// Symmetric matrix with the given off-diagonal pair values; the rest is `fill`.
DistanceMatrix PairDistances(std::size_t n,
                             std::initializer_list<std::tuple<int, int, double>> pairs,
                             double fill) {
  DistanceMatrix d;
  d.values = SquareMatrix(n, fill);
  for (std::size_t i = 0; i < n; ++i) d.values(i, i) = 0.0;
  for (const auto& [i, j, v] : pairs) d.values(i, j) = d.values(j, i) = v;
  return d;
}

DistanceMatrix RandomDistances(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  DistanceMatrix d;
  d.values = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.values(i, j) = i == j ? 0.0 : unit(rng);
  }
  return d;
}

Matrix RandomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Overwrites every parameter, biases included, with uniform noise.
void Randomize(Parameters& params, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto tensor : params.Tensors()) {
    for (double& v : tensor) v = u(rng);
  }
}

// Path 0-1-2-...-(n-1) in layer 1 and every second hop in layer 2.
MultiScaleGraph PathGraph(std::size_t n) {
  std::vector<Edge> near, far;
  for (std::uint32_t i = 0; i + 1 < n; ++i) near.push_back({i, i + 1, 0.8});
  for (std::uint32_t i = 0; i + 2 < n; ++i) far.push_back({i, i + 2, 0.4});
  return MakeGraph(n, {near, far});
}

// Central differences with eps = 1e-6 carry ~2e-10 absolute round-off, so
// relative error is measured against at least this magnitude.
constexpr double kGradientFloor = 1e-4;

ModelConfig SmallConfig(std::size_t dim, std::size_t out) {
  ModelConfig c;
  c.hidden_dim = dim;
  c.output_dim = out;
  return c;
}

void ExpectMatchesReference(const GnnModel& model, const MultiScaleGraph& graph,
                            const Matrix& input) {
  const EmbeddingState state = Forward(model, graph, input);
  const testing::Rows expected = testing::ReferenceForward(model, graph, input);
  ASSERT_EQ(static_cast<std::size_t>(state.output.rows()), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    for (std::size_t c = 0; c < expected[i].size(); ++c) {
      EXPECT_NEAR(state.output(i, c), expected[i][c], 1e-12) << i << "," << c;
    }
  }
}

TEST(InitModelTest, SameSeedSameBits) {
  const MultiScaleGraph g = PathGraph(6);
  const InitializedModel a = InitModel(g, SmallConfig(8, 4));
  const InitializedModel b = InitModel(g, SmallConfig(8, 4));
  EXPECT_EQ(a.input, b.input);
  const auto ta = a.model.params.Tensors();
  const auto tb = b.model.params.Tensors();
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t t = 0; t < ta.size(); ++t) {
    EXPECT_TRUE(std::equal(ta[t].begin(), ta[t].end(), tb[t].begin(), tb[t].end()));
  }
  ModelConfig other = SmallConfig(8, 4);
  other.seed = 43;
  EXPECT_NE(InitModel(g, other).input, a.input);
}

TEST(InitModelTest, ShapesFollowTheGraphAndConfig) {
  const InitializedModel init = InitModel(PathGraph(5), ModelConfig{});
  EXPECT_EQ(init.input.rows(), 5);
  EXPECT_EQ(init.input.cols(), 256);
  EXPECT_EQ(init.model.config.num_layers, 2u);
  EXPECT_EQ(init.model.params.mlp.w1.rows(), 512);
  EXPECT_EQ(init.model.params.mlp.w2.cols(), 128);
  EXPECT_TRUE(init.model.params.mlp.b1.isZero());
  EXPECT_TRUE(init.model.params.mlp.b2.isZero());
}

TEST(InitModelTest, InputStdMatchesInverseSqrtWidth) {
  const std::size_t n = 400;  // 400 x 256 > 1e5 samples
  const InitializedModel init = InitModel(MakeGraph(n, {{}}), ModelConfig{});
  const double count = static_cast<double>(init.input.size());
  const double mean = init.input.sum() / count;
  const double var = (init.input.array() - mean).square().sum() / (count - 1);
  EXPECT_NEAR(std::sqrt(var), 1.0 / 16.0, 0.05 / 16.0);
}

TEST(AttentionTest, IsolatedNodeHasOnlyItsSelfLoop) {
  const GraphLayer layer{3, {{0, 1, 0.5}}};
  const Neighborhoods nbhd = BuildNeighborhoods(layer, true);
  EXPECT_EQ(nbhd.offsets, (std::vector<std::size_t>{0, 2, 4, 5}));
  EXPECT_EQ(nbhd.nodes, (std::vector<std::uint32_t>{0, 1, 1, 0, 2}));
  EXPECT_EQ(nbhd.bias[0], 0.0);
  EXPECT_EQ(nbhd.bias[1], std::log(0.5));
  EXPECT_EQ(nbhd.bias[4], 0.0);
  const auto alpha = AttentionNormalize(nbhd, std::vector<double>{0.3, -1.0, 2.0, 0.1, 7.0});
  EXPECT_EQ(alpha[4], 1.0);
}

TEST(AttentionTest, EqualInputsAndSymmetricHalvesGiveSymmetricScores) {
  std::mt19937_64 rng(1);
  const GraphLayer layer{2, {{0, 1, 0.6}}};
  LayerParams p{RandomMatrix(rng, 3, 3), Vector(6)};
  p.attention << 0.3, -0.7, 1.1, 0.3, -0.7, 1.1;
  Matrix h(2, 3);
  h << 0.2, -0.4, 0.9, 0.2, -0.4, 0.9;
  const SparseScores s = AttentionScores(layer, p, h, SmallConfig(3, 2));
  // nodes: [0, 1, 1, 0]
  EXPECT_EQ(s.score[1], s.score[3]);
}

TEST(AttentionTest, ThreeNodePathByHand) {
  const GraphLayer layer{3, {{0, 1, 0.7}, {1, 2, 0.5}}};
  LayerParams p{Matrix(2, 2), Vector(4)};
  p.weight << 1, 0, 0, 2;
  p.attention << 1, -1, 0.5, 2;
  Matrix h(3, 2);
  h << 1, 0, 0, 1, 1, 1;
  // Z = [[1,0],[0,2],[1,2]]; left = (1,-2,-1); right = (0.5,4,4.5).
  const SparseScores s = AttentionScores(layer, p, h, SmallConfig(2, 2));
  const std::vector<double> raw = {1.5, 5.0, 2.0, -1.5, 2.5, 3.5, 3.0};
  const std::vector<double> score = {1.5,  5.0 + std::log(0.7), 2.0, -0.3 + std::log(0.7),
                                     2.5 + std::log(0.5), 3.5,  3.0 + std::log(0.5)};
  ASSERT_EQ(s.raw.size(), raw.size());
  for (std::size_t e = 0; e < raw.size(); ++e) {
    EXPECT_DOUBLE_EQ(s.raw[e], raw[e]) << e;
    EXPECT_DOUBLE_EQ(s.score[e], score[e]) << e;
  }

  ModelConfig plain = SmallConfig(2, 2);
  plain.use_edge_weights = false;
  const SparseScores unweighted = AttentionScores(layer, p, h, plain);
  EXPECT_DOUBLE_EQ(unweighted.score[3], -0.3);
}

TEST(AttentionTest, NonFiniteScoreIsNumericError) {
  const GraphLayer layer{2, {{0, 1, 0.5}}};
  LayerParams p{Matrix::Identity(2, 2), Vector::Ones(4)};
  Matrix h(2, 2);
  h << std::numeric_limits<double>::infinity(), 0, 0, 1;
  try {
    AttentionScores(layer, p, h, SmallConfig(2, 2), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(SoftmaxTest, EqualScoresSplitEvenly) {
  const Neighborhoods nbhd = BuildNeighborhoods(GraphLayer{2, {{0, 1, 0.5}}}, false);
  const auto alpha = AttentionNormalize(nbhd, std::vector<double>{0.4, 0.4, -3.0, -3.0});
  for (double a : alpha) EXPECT_EQ(a, 0.5);
}

TEST(SoftmaxTest, RowsSumToOneAndSurviveLargeScores) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 800.0);
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < 12; ++i) {
    for (std::uint32_t j = i + 1; j < 12; ++j) {
      if ((i * 7 + j) % 3 == 0) edges.push_back({i, j, 0.5});
    }
  }
  const Neighborhoods nbhd = BuildNeighborhoods(GraphLayer{12, edges}, true);
  std::vector<double> scores(nbhd.nodes.size());
  for (double& s : scores) s = u(rng);
  const auto alpha = AttentionNormalize(nbhd, scores);
  for (std::size_t i = 0; i < nbhd.n(); ++i) {
    double sum = 0.0;
    for (std::size_t p = nbhd.offsets[i]; p < nbhd.offsets[i + 1]; ++p) {
      EXPECT_TRUE(std::isfinite(alpha[p]));
      sum += alpha[p];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ForwardTest, MatchesReferenceOnFourNodesTwoLayers) {
  // Layer 1 [0.25, 0.5): (0,1), (1,2). Layer 2 [0.5, 1): (0,2), (2,3).
  const DistanceMatrix d =
      PairDistances(4, {{0, 1, 0.3}, {1, 2, 0.4}, {0, 2, 0.6}, {2, 3, 0.7}}, 0.1);
  const MultiScaleGraph g = BuildGraph(d, MakeThresholds(0.25, 2));
  ASSERT_EQ(g.layers[0].edges.size(), 2u);
  ASSERT_EQ(g.layers[1].edges.size(), 2u);

  std::mt19937_64 rng(3);
  for (bool sequential : {true, false}) {
    for (bool weights : {true, false}) {
      ModelConfig cfg = SmallConfig(2, 2);
      cfg.sequential = sequential;
      cfg.use_edge_weights = weights;
      InitializedModel init = InitModel(g, cfg);
      Randomize(init.model.params, rng, 1.0);
      ExpectMatchesReference(init.model, g, init.input);
    }
  }
}

TEST(ForwardTest, MatchesReferenceOnSparseGraph) {
  // Few edges per node, so aggregation walks the edge lists.
  const MultiScaleGraph g = PathGraph(30);
  std::mt19937_64 rng(4);
  InitializedModel init = InitModel(g, SmallConfig(5, 3));
  Randomize(init.model.params, rng, 0.8);
  ExpectMatchesReference(init.model, g, init.input);
}

TEST(ForwardTest, AlphaRowsSumToOne) {
  std::mt19937_64 rng(5);
  const DistanceMatrix d = RandomDistances(rng, 20);
  const MultiScaleGraph g = BuildGraph(d, MakeThresholds(0.1, 3));
  const InitializedModel init = InitModel(g, SmallConfig(6, 4));
  const EmbeddingState state = Forward(init.model, g, init.input);
  for (const LayerCache& layer : state.layers) {
    for (std::size_t i = 0; i < layer.nbhd.n(); ++i) {
      double sum = 0.0;
      for (std::size_t p = layer.nbhd.offsets[i]; p < layer.nbhd.offsets[i + 1]; ++p) {
        sum += layer.alpha[p];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(ForwardTest, ZeroInputGivesIdenticalRows) {
  const MultiScaleGraph g = PathGraph(6);
  InitializedModel init = InitModel(g, SmallConfig(4, 3));
  std::mt19937_64 rng(6);
  Randomize(init.model.params, rng, 1.0);
  init.model.params.mlp.b1.setZero();
  const Matrix zero = Matrix::Zero(6, 4);
  const EmbeddingState state = Forward(init.model, g, zero);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_EQ(state.output.row(i), init.model.params.mlp.b2.transpose());
  }
}

TEST(ForwardTest, SingleLayerIgnoresTheSequentialSwitch) {
  std::mt19937_64 rng(7);
  const DistanceMatrix d = RandomDistances(rng, 10);
  const MultiScaleGraph g = BuildGraph(d, ChooseThresholds(d, 1).thresholds);
  ModelConfig cfg = SmallConfig(6, 4);
  const InitializedModel on = InitModel(g, cfg);
  cfg.sequential = false;
  const InitializedModel off = InitModel(g, cfg);
  EXPECT_EQ(Forward(on.model, g, on.input).output, Forward(off.model, g, off.input).output);
}

TEST(ForwardTest, PermutingNodesPermutesRows) {
  std::mt19937_64 rng(8);
  const std::size_t n = 9;
  const DistanceMatrix d = RandomDistances(rng, n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  DistanceMatrix pd;
  pd.values = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) pd.values(perm[i], perm[j]) = d.values(i, j);
  }
  const Thresholds t = MakeThresholds(0.2, 3);
  const MultiScaleGraph g = BuildGraph(d, t);
  const MultiScaleGraph pg = BuildGraph(pd, t);
  for (bool sparse : {false, true}) {
    const MultiScaleGraph& base = sparse ? PathGraph(n) : g;
    MultiScaleGraph permuted = base;
    if (sparse) {
      for (GraphLayer& layer : permuted.layers) {
        for (Edge& e : layer.edges) {
          const auto a = static_cast<std::uint32_t>(perm[e.i]);
          const auto b = static_cast<std::uint32_t>(perm[e.j]);
          e = {std::min(a, b), std::max(a, b), e.weight};
        }
        std::sort(layer.edges.begin(), layer.edges.end(),
                  [](const Edge& x, const Edge& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
      }
    } else {
      permuted = pg;
    }
    const InitializedModel init = InitModel(base, SmallConfig(5, 3));
    Matrix pinput(n, 5);
    for (std::size_t i = 0; i < n; ++i) pinput.row(perm[i]) = init.input.row(i);
    const Matrix out = Forward(init.model, base, init.input).output;
    const Matrix pout = Forward(init.model, permuted, pinput).output;
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        EXPECT_NEAR(pout(perm[i], c), out(i, c), 1e-12);
      }
    }
  }
}

TEST(ForwardTest, RejectsMismatchedShapes) {
  const MultiScaleGraph g = PathGraph(4);
  const InitializedModel init = InitModel(g, SmallConfig(3, 2));
  EXPECT_THROW(Forward(init.model, g, Matrix::Zero(5, 3)), Error);
  EXPECT_THROW(Forward(init.model, MakeGraph(4, {{}}), init.input), Error);
}

TEST(LossTest, ParallelSimilaritiesGiveZeroAndOppositeGiveTwo) {
  std::mt19937_64 rng(9);
  const Matrix h = RandomMatrix(rng, 7, 3);
  const Matrix s = h * h.transpose();
  for (double c : {0.5, 3.0}) {
    DistanceMatrix parallel, opposite;
    parallel.values = SquareMatrix(7);
    opposite.values = SquareMatrix(7);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        if (i == j) continue;
        parallel.values(i, j) = 1.0 - s(i, j) / c;
        opposite.values(i, j) = 1.0 + s(i, j) / c;
      }
    }
    EXPECT_NEAR(CosineLoss(h, parallel).loss, 0.0, 1e-14);
    EXPECT_NEAR(CosineLoss(h, opposite).loss, 2.0, 1e-14);
  }
}

TEST(LossTest, DiagonalOfTheEmbeddingsIsIgnored) {
  std::mt19937_64 rng(10);
  const DistanceMatrix d = RandomDistances(rng, 5);
  Matrix h = RandomMatrix(rng, 5, 5);
  const double before = CosineLoss(h, d).loss;
  // Appending an orthogonal column per row only changes the diagonal of H H^T.
  Matrix wide(5, 10);
  wide << h, Matrix::Identity(5, 5) * 4.0;
  EXPECT_NEAR(CosineLoss(wide, d).loss, before, 1e-14);
}

TEST(LossTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  const DistanceMatrix d = RandomDistances(rng, 6);
  Matrix h = RandomMatrix(rng, 6, 4);
  const LossResult result = CosineLoss(h, d);
  const double eps = 1e-6;
  for (Eigen::Index e = 0; e < h.size(); ++e) {
    const double saved = h.data()[e];
    h.data()[e] = saved + eps;
    const double plus = CosineLoss(h, d).loss;
    h.data()[e] = saved - eps;
    const double minus = CosineLoss(h, d).loss;
    h.data()[e] = saved;
    const double numeric = (plus - minus) / (2 * eps);
    const double analytic = result.grad.data()[e];
    EXPECT_LT(std::abs(numeric - analytic) / std::max({std::abs(analytic), std::abs(numeric), 1e-8}),
              1e-6)
        << e;
  }
}

TEST(LossTest, ZeroEmbeddingsAreDegenerate) {
  std::mt19937_64 rng(12);
  const LossResult r = CosineLoss(Matrix::Zero(4, 3), RandomDistances(rng, 4));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.loss, 1.0);
  EXPECT_TRUE(r.grad.isZero());
}

TEST(LossTest, ConstantTargetIsRejected) {
  DistanceMatrix d;
  d.values = SquareMatrix(3, 1.0);
  EXPECT_THROW(CosineLoss(Matrix::Ones(3, 2), d), Error);
}

TEST(BackwardTest, DenseModelMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  const DistanceMatrix d =
      PairDistances(5, {{0, 1, 0.3}, {1, 2, 0.4}, {3, 4, 0.45}, {0, 2, 0.6}, {2, 3, 0.7}}, 0.1);
  const MultiScaleGraph g = BuildGraph(d, MakeThresholds(0.25, 2));
  for (bool sequential : {true, false}) {
    ModelConfig cfg = SmallConfig(4, 3);
    cfg.sequential = sequential;
    InitializedModel init = InitModel(g, cfg);
    Randomize(init.model.params, rng, 0.7);
    const testing::GradientCheck check =
        testing::FiniteDifferenceSweep(init.model, g, init.input, d, 1e-6, kGradientFloor);
    EXPECT_GT(check.checked, 60u);
    EXPECT_LT(check.worst_relative_error, 1e-5) << check.worst_location;
  }
}

TEST(BackwardTest, SparseModelMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  const MultiScaleGraph g = PathGraph(24);
  const DistanceMatrix d = RandomDistances(rng, 24);
  InitializedModel init = InitModel(g, SmallConfig(3, 2));
  Randomize(init.model.params, rng, 0.7);
  const testing::GradientCheck check =
      testing::FiniteDifferenceSweep(init.model, g, init.input, d, 1e-6, kGradientFloor);
  EXPECT_LT(check.worst_relative_error, 1e-5) << check.worst_location;
}

TEST(BackwardTest, SelfLoopOnlyLayerStillTrainsItsWeights) {
  std::mt19937_64 rng(15);
  const MultiScaleGraph g = MakeGraph(5, {{{0, 1, 0.7}, {1, 2, 0.6}, {3, 4, 0.9}}, {}});
  const DistanceMatrix d = RandomDistances(rng, 5);
  InitializedModel init = InitModel(g, SmallConfig(4, 3));
  Randomize(init.model.params, rng, 0.7);
  const EmbeddingState state = Forward(init.model, g, init.input);
  const Parameters grads = Backward(init.model, g, state, CosineLoss(state.output, d).grad);
  EXPECT_GT(grads.layers[1].weight.norm(), 0.0);
  const testing::GradientCheck check =
      testing::FiniteDifferenceSweep(init.model, g, init.input, d, 1e-6, kGradientFloor);
  EXPECT_LT(check.worst_relative_error, 1e-5) << check.worst_location;
}

TEST(BackwardTest, ZeroUpstreamGradientGivesZeroGradients) {
  const MultiScaleGraph g = PathGraph(6);
  const InitializedModel init = InitModel(g, SmallConfig(4, 3));
  const EmbeddingState state = Forward(init.model, g, init.input);
  const Parameters grads = Backward(init.model, g, state, Matrix::Zero(6, 3));
  for (auto t : grads.Tensors()) {
    for (double v : t) EXPECT_EQ(v, 0.0);
  }
}

TEST(BackwardTest, StaleStateIsRejected) {
  const MultiScaleGraph g = PathGraph(6);
  InitializedModel init = InitModel(g, SmallConfig(4, 3));
  const EmbeddingState state = Forward(init.model, g, init.input);
  ++init.model.version;
  EXPECT_THROW(Backward(init.model, g, state, Matrix::Zero(6, 3)), Error);
  --init.model.version;
  EXPECT_THROW(Backward(init.model, PathGraph(7), state, Matrix::Zero(6, 3)), Error);
  EXPECT_THROW(Backward(init.model, g, state, Matrix::Zero(6, 2)), Error);
}

TEST(ModelFileTest, RoundTrip) {
  const MultiScaleGraph g = PathGraph(5);
  ModelConfig cfg = SmallConfig(4, 3);
  cfg.sequential = false;
  cfg.seed = 99;
  InitializedModel init = InitModel(g, cfg);
  std::mt19937_64 rng(16);
  Randomize(init.model.params, rng, 1.0);
  const auto path = std::filesystem::path(::testing::TempDir()) / "m.tsn";
  WriteModelFile(path, init.model, init.input);
  const InitializedModel back = ReadModelFile(path);
  EXPECT_EQ(back.input, init.input);
  EXPECT_EQ(back.model.config.num_layers, 2u);
  EXPECT_EQ(back.model.config.hidden_dim, 4u);
  EXPECT_EQ(back.model.config.output_dim, 3u);
  EXPECT_FALSE(back.model.config.sequential);
  EXPECT_EQ(back.model.config.seed, 99u);
  EXPECT_EQ(Forward(back.model, g, back.input).output,
            Forward(init.model, g, init.input).output);
}

}  // namespace
}  // namespace trajsim

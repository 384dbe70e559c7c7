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

// Multi-scale graph attention network with a hand-written backward pass.
//
// Layer k reads H^{k-1} (or H^0 without sequential connection) and graph
// layer k:
//
//   Z     = H^{k-1} W_k
//   e_ij  = a_left . z_i + a_right . z_j
//   w_ij  = LeakyReLU(e_ij) + log(edge weight)      (0 bias on self-loops)
//   alpha = softmax of w over {i} u N_k(i)
//   H^k_i = ReLU(sum_j alpha_ij z_j)
//
// The output is MLP(concat(H^1, ..., H^m)) with one ReLU hidden layer.
// Matrices are row-major with one row per node.

#ifndef TRAJSIM_GNN_H_
#define TRAJSIM_GNN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "trajsim/distance.h"
#include "trajsim/embedding.h"
#include "trajsim/graph.h"

namespace trajsim {

struct ModelConfig {
  std::size_t num_layers = 3;
  // D_0 = D_1 = ... = D_m; also the MLP hidden width.
  std::size_t hidden_dim = 256;
  std::size_t output_dim = 128;
  // When false every layer reads H^0 instead of the previous layer's output.
  bool sequential = true;
  // Adds log(edge weight) to each neighbor's attention score.
  bool use_edge_weights = true;
  double leaky_slope = 0.2;
  std::uint64_t seed = 42;
};

struct LayerParams {
  Matrix weight;     // D_{k-1} x D_k
  Vector attention;  // 2 D_k: left half scores the center, right half the neighbor
};

struct MlpParams {
  Matrix w1;  // (m D) x hidden
  Vector b1;
  Matrix w2;  // hidden x output
  Vector b2;
};

// All trainable tensors. Also used to hold gradients of the same shapes.
struct Parameters {
  std::vector<LayerParams> layers;
  MlpParams mlp;

  // Flat views over every tensor, in checkpoint order.
  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;
  Parameters ZerosLike() const;
};

struct GnnModel {
  ModelConfig config;
  Parameters params;
  // Bumped on every parameter update; forward caches remember it.
  std::uint64_t version = 0;
};

struct InitializedModel {
  GnnModel model;
  Matrix input;  // H^0, n x D_0, entries ~ N(0, 1/sqrt(D_0))
};

// Seeds H^0 from a Gaussian and W_k, a_k and the MLP weights from
// Xavier-uniform; biases start at zero. num_layers is taken from the graph.
InitializedModel InitModel(const MultiScaleGraph& graph, ModelConfig config);

// CSR neighborhoods of one layer. Each node lists itself first, then its
// neighbors in ascending order; `bias` is the additive attention term.
struct Neighborhoods {
  std::vector<std::size_t> offsets;  // n + 1
  std::vector<std::uint32_t> nodes;
  std::vector<double> bias;

  std::size_t n() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

Neighborhoods BuildNeighborhoods(const GraphLayer& layer, bool use_edge_weights);

// Attention scores aligned with Neighborhoods::nodes.
struct SparseScores {
  std::vector<double> raw;    // a . [z_i || z_j] before LeakyReLU
  std::vector<double> score;  // LeakyReLU(raw) + bias
};

// Scores from the per-node projections left = Z a_left and right = Z a_right.
SparseScores ScoresFromProjections(const Neighborhoods& nbhd, const Vector& left,
                                   const Vector& right, double leaky_slope,
                                   std::size_t layer_index = 0);

// Computes Z = H_prev W_k and the scores of every edge and self-loop. Throws
// kNumeric naming the layer and edge on a non-finite score.
SparseScores AttentionScores(const GraphLayer& layer, const LayerParams& params,
                             const Matrix& h_prev, const ModelConfig& config,
                             std::size_t layer_index = 0);

// Max-subtracted softmax over each node's neighborhood.
std::vector<double> AttentionNormalize(const Neighborhoods& nbhd,
                                       std::span<const double> scores);

struct LayerCache {
  Neighborhoods nbhd;
  Matrix transformed;  // Z
  Vector left;         // Z a_left
  Vector right;        // Z a_right
  SparseScores scores;
  std::vector<double> alpha;
  Matrix aggregated;   // pre-activation sum_j alpha_ij z_j
  Matrix output;       // H^k
};

// Activations retained by Forward for Backward.
struct EmbeddingState {
  Matrix input;  // H^0
  std::vector<LayerCache> layers;
  Matrix concat;
  Matrix mlp_pre;     // concat W1 + b1
  Matrix mlp_hidden;  // ReLU(mlp_pre)
  Matrix output;      // H_final
  std::uint64_t model_version = 0;
};

EmbeddingState Forward(const GnnModel& model, const MultiScaleGraph& graph,
                       const Matrix& input);

// Off-diagonal similarity target 1 - d~ with a zero diagonal.
struct SimilarityTarget {
  Matrix values;
  double norm = 0.0;  // Frobenius norm of the off-diagonal entries
};

SimilarityTarget MakeSimilarityTarget(const DistanceMatrix& d);

struct LossResult {
  double loss = 1.0;
  Matrix grad;  // dL/dH
  // True when H H^T vanishes off the diagonal; loss is 1, gradient zero.
  bool degenerate = false;
};

// L = 1 - cos(offdiag(H H^T), offdiag(T)) on the flattened entries.
LossResult CosineLoss(const Matrix& embeddings, const SimilarityTarget& target);
LossResult CosineLoss(const Matrix& embeddings, const DistanceMatrix& d);

// Reverse pass through the MLP and every attention layer. Throws kBadInput if
// `state` was not produced by Forward on this model version and graph.
Parameters Backward(const GnnModel& model, const MultiScaleGraph& graph,
                    const EmbeddingState& state, const Matrix& grad_output);

// "TSN1" checkpoints: config block, then H^0 and every parameter tensor as
// (u32 rows, u32 cols, float64 data).
void WriteModelFile(const std::filesystem::path& path, const GnnModel& model,
                    const Matrix& input);
InitializedModel ReadModelFile(const std::filesystem::path& path);

}  // namespace trajsim

#endif  // TRAJSIM_GNN_H_

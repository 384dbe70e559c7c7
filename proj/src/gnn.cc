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
#include <random>
#include <string>

#include "trajsim/binary_io.h"
#include "trajsim/common.h"

namespace trajsim {
namespace {

constexpr std::string_view kModelMagic = "TSNMODL1";
constexpr std::uint8_t kActivationRelu = 0;

std::span<double> View(Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> View(Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<const double> View(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> View(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Matrix XavierUniform(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out,
                     std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : View(m)) v = dist(rng);
  return m;
}

void ValidateConfig(const ModelConfig& config) {
  if (config.num_layers < 1) ThrowBadInput("model needs at least one layer");
  if (config.hidden_dim < 1 || config.output_dim < 1) {
    ThrowBadInput("model dimensions must be positive");
  }
  if (!std::isfinite(config.leaky_slope)) ThrowBadInput("leaky slope must be finite");
}

void CheckShapes(const GnnModel& model, const MultiScaleGraph& graph, const Matrix& input) {
  const ModelConfig& cfg = model.config;
  const auto n = static_cast<Eigen::Index>(graph.n());
  const auto dim = static_cast<Eigen::Index>(cfg.hidden_dim);
  if (graph.num_layers() != cfg.num_layers ||
      model.params.layers.size() != cfg.num_layers) {
    ThrowBadInput("model has " + std::to_string(cfg.num_layers) +
                  " layers but the graph has " + std::to_string(graph.num_layers()));
  }
  if (input.rows() != n || input.cols() != dim) {
    ThrowBadInput("input embedding shape does not match graph size and model width");
  }
  for (const LayerParams& layer : model.params.layers) {
    if (layer.weight.rows() != dim || layer.weight.cols() != dim ||
        layer.attention.size() != 2 * dim) {
      ThrowBadInput("attention layer parameter shape mismatch");
    }
  }
  const MlpParams& mlp = model.params.mlp;
  const auto concat = dim * static_cast<Eigen::Index>(cfg.num_layers);
  if (mlp.w1.rows() != concat || mlp.w1.cols() != dim || mlp.b1.size() != dim ||
      mlp.w2.rows() != dim || mlp.w2.cols() != static_cast<Eigen::Index>(cfg.output_dim) ||
      mlp.b2.size() != static_cast<Eigen::Index>(cfg.output_dim)) {
    ThrowBadInput("MLP parameter shape mismatch");
  }
}

// Neighborhoods at least this full are aggregated with dense products.
constexpr double kDenseFillRatio = 0.25;

bool UseDenseAggregation(const Neighborhoods& nbhd) {
  const auto n = static_cast<double>(nbhd.n());
  return static_cast<double>(nbhd.nodes.size()) >= kDenseFillRatio * n * n;
}

Matrix DenseAttention(const Neighborhoods& nbhd, const std::vector<double>& alpha) {
  const auto n = static_cast<Eigen::Index>(nbhd.n());
  Matrix dense = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < nbhd.n(); ++i) {
    for (std::size_t p = nbhd.offsets[i]; p < nbhd.offsets[i + 1]; ++p) {
      dense(static_cast<Eigen::Index>(i), nbhd.nodes[p]) = alpha[p];
    }
  }
  return dense;
}

Matrix ReluMask(const Matrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

void WriteTensor(BinaryWriter& w, const double* data, Eigen::Index rows, Eigen::Index cols) {
  w.U32(static_cast<std::uint32_t>(rows));
  w.U32(static_cast<std::uint32_t>(cols));
  w.F64s(std::span<const double>(data, static_cast<std::size_t>(rows * cols)));
}

Matrix ReadTensor(BinaryReader& r, Eigen::Index rows, Eigen::Index cols) {
  const std::uint32_t got_rows = r.U32();
  const std::uint32_t got_cols = r.U32();
  if (got_rows != rows || got_cols != cols) {
    ThrowBadInput("checkpoint tensor has an unexpected shape");
  }
  Matrix m(rows, cols);
  r.F64s(View(m));
  return m;
}

}  // namespace

std::vector<std::span<double>> Parameters::Tensors() {
  std::vector<std::span<double>> out;
  for (LayerParams& layer : layers) {
    out.push_back(View(layer.weight));
    out.push_back(View(layer.attention));
  }
  out.push_back(View(mlp.w1));
  out.push_back(View(mlp.b1));
  out.push_back(View(mlp.w2));
  out.push_back(View(mlp.b2));
  return out;
}

std::vector<std::span<const double>> Parameters::Tensors() const {
  std::vector<std::span<const double>> out;
  for (const LayerParams& layer : layers) {
    out.push_back(View(layer.weight));
    out.push_back(View(layer.attention));
  }
  out.push_back(View(mlp.w1));
  out.push_back(View(mlp.b1));
  out.push_back(View(mlp.w2));
  out.push_back(View(mlp.b2));
  return out;
}

Parameters Parameters::ZerosLike() const {
  Parameters zeros;
  for (const LayerParams& layer : layers) {
    zeros.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                            Vector::Zero(layer.attention.size())});
  }
  zeros.mlp.w1 = Matrix::Zero(mlp.w1.rows(), mlp.w1.cols());
  zeros.mlp.b1 = Vector::Zero(mlp.b1.size());
  zeros.mlp.w2 = Matrix::Zero(mlp.w2.rows(), mlp.w2.cols());
  zeros.mlp.b2 = Vector::Zero(mlp.b2.size());
  return zeros;
}

InitializedModel InitModel(const MultiScaleGraph& graph, ModelConfig config) {
  if (graph.n() == 0) ThrowBadInput("cannot build a model for an empty graph");
  config.num_layers = graph.num_layers();
  ValidateConfig(config);

  const auto n = static_cast<Eigen::Index>(graph.n());
  const auto dim = static_cast<Eigen::Index>(config.hidden_dim);
  const auto out_dim = static_cast<Eigen::Index>(config.output_dim);
  const auto m = static_cast<Eigen::Index>(config.num_layers);
  std::mt19937_64 rng(config.seed);

  InitializedModel init;
  init.input.resize(n, dim);
  std::normal_distribution<double> gaussian(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (double& v : View(init.input)) v = gaussian(rng);

  GnnModel& model = init.model;
  model.config = config;
  for (Eigen::Index k = 0; k < m; ++k) {
    LayerParams layer;
    layer.weight = XavierUniform(dim, dim, dim, dim, rng);
    // The attention vector maps a 2D concatenation to one score.
    const Matrix a = XavierUniform(2 * dim, 1, 2.0 * dim, 1.0, rng);
    layer.attention = Eigen::Map<const Vector>(a.data(), 2 * dim);
    model.params.layers.push_back(std::move(layer));
  }
  model.params.mlp.w1 = XavierUniform(m * dim, dim, m * dim, dim, rng);
  model.params.mlp.b1 = Vector::Zero(dim);
  model.params.mlp.w2 = XavierUniform(dim, out_dim, dim, out_dim, rng);
  model.params.mlp.b2 = Vector::Zero(out_dim);
  return init;
}

Neighborhoods BuildNeighborhoods(const GraphLayer& layer, bool use_edge_weights) {
  const std::size_t n = layer.n;
  std::vector<std::size_t> degree(n, 1);  // self-loop
  for (const Edge& e : layer.edges) {
    if (e.i >= n || e.j >= n || e.i == e.j) ThrowBadInput("invalid edge in graph layer");
    ++degree[e.i];
    ++degree[e.j];
  }

  Neighborhoods nbhd;
  nbhd.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) nbhd.offsets[i + 1] = nbhd.offsets[i] + degree[i];
  nbhd.nodes.resize(nbhd.offsets[n]);
  nbhd.bias.assign(nbhd.offsets[n], 0.0);

  std::vector<std::size_t> cursor(nbhd.offsets.begin(), nbhd.offsets.end() - 1);
  for (std::size_t i = 0; i < n; ++i) nbhd.nodes[cursor[i]++] = static_cast<std::uint32_t>(i);
  for (const Edge& e : layer.edges) {
    if (!(e.weight > 0.0)) ThrowBadInput("edge weights must be positive");
    const double bias = use_edge_weights ? std::log(e.weight) : 0.0;
    nbhd.bias[cursor[e.i]] = bias;
    nbhd.nodes[cursor[e.i]++] = e.j;
    nbhd.bias[cursor[e.j]] = bias;
    nbhd.nodes[cursor[e.j]++] = e.i;
  }
  // Neighbors after the self entry in ascending order; the biases move along.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = nbhd.offsets[i] + 1;
    const std::size_t end = nbhd.offsets[i + 1];
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p) row.emplace_back(nbhd.nodes[p], nbhd.bias[p]);
    std::sort(row.begin(), row.end());
    for (std::size_t p = begin; p < end; ++p) {
      nbhd.nodes[p] = row[p - begin].first;
      nbhd.bias[p] = row[p - begin].second;
    }
  }
  return nbhd;
}

SparseScores ScoresFromProjections(const Neighborhoods& nbhd, const Vector& left,
                                   const Vector& right, double leaky_slope,
                                   std::size_t layer_index) {
  const std::size_t n = nbhd.n();
  SparseScores scores;
  scores.raw.resize(nbhd.nodes.size());
  scores.score.resize(nbhd.nodes.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = nbhd.offsets[i]; p < nbhd.offsets[i + 1]; ++p) {
      const std::uint32_t j = nbhd.nodes[p];
      const double raw = left[static_cast<Eigen::Index>(i)] + right[j];
      const double activated = raw > 0.0 ? raw : leaky_slope * raw;
      scores.raw[p] = raw;
      scores.score[p] = activated + nbhd.bias[p];
      if (!std::isfinite(scores.score[p])) {
        ThrowNumeric("non-finite attention score in layer " +
                     std::to_string(layer_index + 1) + " at edge (" + std::to_string(i) +
                     ", " + std::to_string(j) + ")");
      }
    }
  }
  return scores;
}

SparseScores AttentionScores(const GraphLayer& layer, const LayerParams& params,
                             const Matrix& h_prev, const ModelConfig& config,
                             std::size_t layer_index) {
  const Eigen::Index dim = params.weight.cols();
  if (h_prev.cols() != params.weight.rows() ||
      h_prev.rows() != static_cast<Eigen::Index>(layer.n) ||
      params.attention.size() != 2 * dim) {
    ThrowBadInput("attention input shape mismatch");
  }
  const Neighborhoods nbhd = BuildNeighborhoods(layer, config.use_edge_weights);
  const Matrix transformed = h_prev * params.weight;
  const Vector left = transformed * params.attention.head(dim);
  const Vector right = transformed * params.attention.tail(dim);
  return ScoresFromProjections(nbhd, left, right, config.leaky_slope, layer_index);
}

std::vector<double> AttentionNormalize(const Neighborhoods& nbhd,
                                       std::span<const double> scores) {
  if (scores.size() != nbhd.nodes.size()) ThrowBadInput("score count mismatch");
  std::vector<double> alpha(scores.size());
  for (std::size_t i = 0; i < nbhd.n(); ++i) {
    const std::size_t begin = nbhd.offsets[i];
    const std::size_t end = nbhd.offsets[i + 1];
    const double peak = *std::max_element(scores.begin() + begin, scores.begin() + end);
    double total = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      alpha[p] = std::exp(scores[p] - peak);
      total += alpha[p];
    }
    for (std::size_t p = begin; p < end; ++p) alpha[p] /= total;
  }
  return alpha;
}

EmbeddingState Forward(const GnnModel& model, const MultiScaleGraph& graph,
                       const Matrix& input) {
  CheckShapes(model, graph, input);
  const ModelConfig& cfg = model.config;
  const std::size_t n = graph.n();
  const auto dim = static_cast<Eigen::Index>(cfg.hidden_dim);
  const std::size_t m = cfg.num_layers;

  EmbeddingState state;
  state.input = input;
  state.model_version = model.version;
  state.layers.resize(m);
  state.concat.resize(static_cast<Eigen::Index>(n), dim * static_cast<Eigen::Index>(m));

  for (std::size_t k = 0; k < m; ++k) {
    const LayerParams& params = model.params.layers[k];
    LayerCache& cache = state.layers[k];
    const Matrix& x = (cfg.sequential && k > 0) ? state.layers[k - 1].output : state.input;

    cache.nbhd = BuildNeighborhoods(graph.layers[k], cfg.use_edge_weights);
    cache.transformed = x * params.weight;
    cache.left = cache.transformed * params.attention.head(dim);
    cache.right = cache.transformed * params.attention.tail(dim);
    cache.scores =
        ScoresFromProjections(cache.nbhd, cache.left, cache.right, cfg.leaky_slope, k);
    cache.alpha = AttentionNormalize(cache.nbhd, cache.scores.score);

    if (UseDenseAggregation(cache.nbhd)) {
      cache.aggregated.noalias() = DenseAttention(cache.nbhd, cache.alpha) * cache.transformed;
    } else {
      cache.aggregated = Matrix::Zero(static_cast<Eigen::Index>(n), dim);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = cache.aggregated.row(static_cast<Eigen::Index>(i));
        for (std::size_t p = cache.nbhd.offsets[i]; p < cache.nbhd.offsets[i + 1]; ++p) {
          row += cache.alpha[p] * cache.transformed.row(cache.nbhd.nodes[p]);
        }
      }
    }
    cache.output = cache.aggregated.cwiseMax(0.0);
    state.concat.middleCols(static_cast<Eigen::Index>(k) * dim, dim) = cache.output;
  }

  const MlpParams& mlp = model.params.mlp;
  state.mlp_pre = state.concat * mlp.w1;
  state.mlp_pre.rowwise() += mlp.b1.transpose();
  state.mlp_hidden = state.mlp_pre.cwiseMax(0.0);
  state.output = state.mlp_hidden * mlp.w2;
  state.output.rowwise() += mlp.b2.transpose();
  if (!state.output.allFinite()) ThrowNumeric("non-finite embeddings after forward pass");
  return state;
}

SimilarityTarget MakeSimilarityTarget(const DistanceMatrix& d) {
  const std::size_t n = d.n();
  SimilarityTarget target;
  target.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        target.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            1.0 - SymmetrizedDistance(d, i, j);
      }
    }
  }
  target.norm = target.values.norm();
  return target;
}

LossResult CosineLoss(const Matrix& embeddings, const SimilarityTarget& target) {
  const Eigen::Index n = embeddings.rows();
  if (target.values.rows() != n || target.values.cols() != n) {
    ThrowBadInput("embedding count does not match the distance matrix");
  }
  if (!(target.norm > 0.0)) ThrowBadInput("similarity target is identically zero");

  Matrix gram = embeddings * embeddings.transpose();
  gram.diagonal().setZero();
  const double gram_norm = gram.norm();

  LossResult result;
  if (!(gram_norm > 0.0)) {
    result.loss = 1.0;
    result.grad = Matrix::Zero(n, embeddings.cols());
    result.degenerate = true;
    return result;
  }
  const double inner = gram.cwiseProduct(target.values).sum();
  const double denom = gram_norm * target.norm;
  result.loss = 1.0 - inner / denom;

  // dL/dS on the off-diagonal entries; both S and T have zero diagonals.
  const Matrix grad_gram =
      -(target.values - (inner / (gram_norm * gram_norm)) * gram) / denom;
  result.grad = (grad_gram + grad_gram.transpose()) * embeddings;
  return result;
}

LossResult CosineLoss(const Matrix& embeddings, const DistanceMatrix& d) {
  return CosineLoss(embeddings, MakeSimilarityTarget(d));
}

Parameters Backward(const GnnModel& model, const MultiScaleGraph& graph,
                    const EmbeddingState& state, const Matrix& grad_output) {
  const ModelConfig& cfg = model.config;
  const std::size_t n = graph.n();
  const std::size_t m = cfg.num_layers;
  const auto dim = static_cast<Eigen::Index>(cfg.hidden_dim);

  if (state.model_version != model.version || state.layers.size() != m ||
      graph.num_layers() != m ||
      state.output.rows() != static_cast<Eigen::Index>(n)) {
    ThrowBadInput("stale forward state: model or graph changed since the forward pass");
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (state.layers[k].nbhd.nodes.size() != n + 2 * graph.layers[k].edges.size()) {
      ThrowBadInput("stale forward state: graph layer " + std::to_string(k + 1) +
                    " changed since the forward pass");
    }
  }
  if (grad_output.rows() != state.output.rows() ||
      grad_output.cols() != state.output.cols()) {
    ThrowBadInput("output gradient shape mismatch");
  }

  Parameters grads = model.params.ZerosLike();
  const MlpParams& mlp = model.params.mlp;

  grads.mlp.w2 = state.mlp_hidden.transpose() * grad_output;
  grads.mlp.b2 = grad_output.colwise().sum().transpose();
  const Matrix grad_pre =
      (grad_output * mlp.w2.transpose()).cwiseProduct(ReluMask(state.mlp_pre));
  grads.mlp.w1 = state.concat.transpose() * grad_pre;
  grads.mlp.b1 = grad_pre.colwise().sum().transpose();
  const Matrix grad_concat = grad_pre * mlp.w1.transpose();

  // Gradient reaching H^k from layer k + 1 under sequential connection.
  Matrix carry;
  std::vector<double> grad_alpha;
  for (std::size_t k = m; k-- > 0;) {
    const LayerCache& cache = state.layers[k];
    const LayerParams& params = model.params.layers[k];
    const Neighborhoods& nbhd = cache.nbhd;

    Matrix grad_h = grad_concat.middleCols(static_cast<Eigen::Index>(k) * dim, dim);
    if (carry.size() != 0) grad_h += carry;
    const Matrix grad_agg = grad_h.cwiseProduct(ReluMask(cache.aggregated));

    Matrix grad_z;
    Vector grad_left = Vector::Zero(static_cast<Eigen::Index>(n));
    Vector grad_right = Vector::Zero(static_cast<Eigen::Index>(n));
    grad_alpha.assign(nbhd.nodes.size(), 0.0);
    const bool dense = UseDenseAggregation(nbhd);
    Matrix grad_alpha_dense;
    if (dense) {
      grad_z.noalias() = DenseAttention(nbhd, cache.alpha).transpose() * grad_agg;
      grad_alpha_dense.noalias() = grad_agg * cache.transformed.transpose();
    } else {
      grad_z = Matrix::Zero(static_cast<Eigen::Index>(n), dim);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto gi = grad_agg.row(static_cast<Eigen::Index>(i));
      const std::size_t begin = nbhd.offsets[i];
      const std::size_t end = nbhd.offsets[i + 1];
      double weighted = 0.0;
      for (std::size_t p = begin; p < end; ++p) {
        const std::uint32_t j = nbhd.nodes[p];
        if (dense) {
          grad_alpha[p] = grad_alpha_dense(static_cast<Eigen::Index>(i), j);
        } else {
          grad_alpha[p] = gi.dot(cache.transformed.row(j));
          grad_z.row(j) += cache.alpha[p] * gi;
        }
        weighted += cache.alpha[p] * grad_alpha[p];
      }
      // Softmax Jacobian, then the LeakyReLU mask.
      for (std::size_t p = begin; p < end; ++p) {
        const double grad_score = cache.alpha[p] * (grad_alpha[p] - weighted);
        const double grad_raw =
            cache.scores.raw[p] > 0.0 ? grad_score : cfg.leaky_slope * grad_score;
        grad_left[static_cast<Eigen::Index>(i)] += grad_raw;
        grad_right[nbhd.nodes[p]] += grad_raw;
      }
    }

    const auto a_left = params.attention.head(dim);
    const auto a_right = params.attention.tail(dim);
    grads.layers[k].attention.head(dim) = cache.transformed.transpose() * grad_left;
    grads.layers[k].attention.tail(dim) = cache.transformed.transpose() * grad_right;
    grad_z += grad_left * a_left.transpose() + grad_right * a_right.transpose();

    const bool chained = cfg.sequential && k > 0;
    const Matrix& x = chained ? state.layers[k - 1].output : state.input;
    grads.layers[k].weight = x.transpose() * grad_z;
    if (chained) {
      carry = grad_z * params.weight.transpose();
    } else {
      carry.resize(0, 0);
    }
  }
  return grads;
}

void WriteModelFile(const std::filesystem::path& path, const GnnModel& model,
                    const Matrix& input) {
  const ModelConfig& cfg = model.config;
  BinaryWriter w(path);
  w.Magic(kModelMagic);
  w.U32(static_cast<std::uint32_t>(cfg.num_layers));
  w.U32(static_cast<std::uint32_t>(cfg.hidden_dim));
  w.U32(static_cast<std::uint32_t>(cfg.output_dim));
  w.U64(cfg.seed);
  w.U8(kActivationRelu);
  w.U8(cfg.sequential ? 1 : 0);
  w.U8(cfg.use_edge_weights ? 1 : 0);
  w.F64(cfg.leaky_slope);

  const auto tensors = model.params.Tensors();
  w.U32(static_cast<std::uint32_t>(tensors.size() + 1));
  WriteTensor(w, input.data(), input.rows(), input.cols());
  for (const LayerParams& layer : model.params.layers) {
    WriteTensor(w, layer.weight.data(), layer.weight.rows(), layer.weight.cols());
    WriteTensor(w, layer.attention.data(), layer.attention.size(), 1);
  }
  const MlpParams& mlp = model.params.mlp;
  WriteTensor(w, mlp.w1.data(), mlp.w1.rows(), mlp.w1.cols());
  WriteTensor(w, mlp.b1.data(), mlp.b1.size(), 1);
  WriteTensor(w, mlp.w2.data(), mlp.w2.rows(), mlp.w2.cols());
  WriteTensor(w, mlp.b2.data(), mlp.b2.size(), 1);
  w.Close();
}

InitializedModel ReadModelFile(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectMagic(kModelMagic);
  InitializedModel init;
  ModelConfig& cfg = init.model.config;
  cfg.num_layers = r.U32();
  cfg.hidden_dim = r.U32();
  cfg.output_dim = r.U32();
  cfg.seed = r.U64();
  if (r.U8() != kActivationRelu) ThrowBadInput("unsupported activation in " + path.string());
  cfg.sequential = r.U8() != 0;
  cfg.use_edge_weights = r.U8() != 0;
  cfg.leaky_slope = r.F64();
  ValidateConfig(cfg);

  const std::uint32_t count = r.U32();
  if (count != 2 * cfg.num_layers + 5) ThrowBadInput("bad tensor count in " + path.string());
  const auto dim = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto out_dim = static_cast<Eigen::Index>(cfg.output_dim);
  const auto m = static_cast<Eigen::Index>(cfg.num_layers);

  const std::uint32_t rows = r.U32();
  const std::uint32_t cols = r.U32();
  if (cols != dim) ThrowBadInput("input embedding width mismatch in " + path.string());
  init.input.resize(rows, cols);
  r.F64s(View(init.input));

  Parameters& params = init.model.params;
  for (Eigen::Index k = 0; k < m; ++k) {
    LayerParams layer;
    layer.weight = ReadTensor(r, dim, dim);
    const Matrix a = ReadTensor(r, 2 * dim, 1);
    layer.attention = Eigen::Map<const Vector>(a.data(), 2 * dim);
    params.layers.push_back(std::move(layer));
  }
  params.mlp.w1 = ReadTensor(r, m * dim, dim);
  const Matrix b1 = ReadTensor(r, dim, 1);
  params.mlp.b1 = Eigen::Map<const Vector>(b1.data(), dim);
  params.mlp.w2 = ReadTensor(r, dim, out_dim);
  const Matrix b2 = ReadTensor(r, out_dim, 1);
  params.mlp.b2 = Eigen::Map<const Vector>(b2.data(), out_dim);
  r.ExpectEnd();
  return init;
}

}  // namespace trajsim

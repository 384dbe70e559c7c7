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

#include "trajsim/train.h"

#include <cmath>
#include <string>

#include "trajsim/common.h"

namespace trajsim {

OptimizerKind ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  ThrowBadInput("unknown optimizer: " + std::string(name));
}

std::string_view OptimizerKindName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

double StepDecayLearningRate(const TrainConfig& config, std::size_t epoch) {
  const std::size_t period = config.lr_step_epochs == 0 ? 1 : config.lr_step_epochs;
  return config.learning_rate *
         std::pow(config.lr_gamma, static_cast<double>(epoch / period));
}

void SgdOptimizer::Step(std::span<const std::span<double>> params,
                        std::span<const std::span<const double>> grads,
                        double learning_rate) {
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      params[t][i] -= learning_rate * grads[t][i];
    }
  }
}

void AdamOptimizer::Step(std::span<const std::span<double>> params,
                         std::span<const std::span<const double>> grads,
                         double learning_rate) {
  if (first_moment_.empty()) {
    for (const auto& p : params) {
      first_moment_.emplace_back(p.size(), 0.0);
      second_moment_.emplace_back(p.size(), 0.0);
    }
  }
  ++step_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = first_moment_[t];
    auto& v = second_moment_[t];
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double g = grads[t][i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[t][i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

std::unique_ptr<Optimizer> MakeOptimizer(const TrainConfig& config) {
  if (config.optimizer == OptimizerKind::kSgd) return std::make_unique<SgdOptimizer>();
  return std::make_unique<AdamOptimizer>(config.adam_beta1, config.adam_beta2,
                                         config.adam_epsilon);
}

TrainResult Train(GnnModel& model, const MultiScaleGraph& graph, const Matrix& input,
                  const DistanceMatrix& d, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    ThrowBadInput("learning rate must be a finite non-negative number");
  }
  if (config.steps_per_epoch < 1) ThrowBadInput("steps_per_epoch must be >= 1");
  if (d.n() != graph.n()) ThrowBadInput("distance matrix and graph disagree on node count");

  const SimilarityTarget target = MakeSimilarityTarget(d);
  std::unique_ptr<Optimizer> optimizer = MakeOptimizer(config);

  TrainResult result;
  result.loss_history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = StepDecayLearningRate(config, epoch);
    double loss_sum = 0.0;
    for (std::size_t step = 0; step < config.steps_per_epoch; ++step) {
      EmbeddingState state;
      LossResult loss;
      try {
        state = Forward(model, graph, input);
        loss = CosineLoss(state.output, target);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNumeric) throw;
        ThrowNumeric("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(loss.loss)) {
        ThrowNumeric("non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss.loss;
      const Parameters grads = Backward(model, graph, state, loss.grad);
      const auto grad_views = grads.Tensors();
      const auto param_views = model.params.Tensors();
      optimizer->Step(param_views, grad_views, lr);
      ++model.version;
    }
    const double mean = loss_sum / static_cast<double>(config.steps_per_epoch);
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean, lr);
  }

  const EmbeddingState final_state = Forward(model, graph, input);
  result.embeddings.ids = graph.node_ids.empty() ? SequentialIds(graph.n()) : graph.node_ids;
  result.embeddings.vectors = final_state.output;
  ValidateEmbeddingSet(result.embeddings);
  return result;
}

}  // namespace trajsim

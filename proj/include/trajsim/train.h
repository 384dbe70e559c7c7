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

#ifndef TRAJSIM_TRAIN_H_
#define TRAJSIM_TRAIN_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "trajsim/gnn.h"

namespace trajsim {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind ParseOptimizerKind(std::string_view name);
std::string_view OptimizerKindName(OptimizerKind kind);

struct TrainConfig {
  std::size_t epochs = 6;
  // Full-batch updates per epoch.
  std::size_t steps_per_epoch = 400;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // StepLR: multiply the rate by lr_gamma every lr_step_epochs epochs.
  std::size_t lr_step_epochs = 5;
  double lr_gamma = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

// Learning rate in effect during `epoch` (0-based).
double StepDecayLearningRate(const TrainConfig& config, std::size_t epoch);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Updates every tensor in `params` in place from the matching gradient.
  virtual void Step(std::span<const std::span<double>> params,
                    std::span<const std::span<const double>> grads,
                    double learning_rate) = 0;
};

class SgdOptimizer : public Optimizer {
 public:
  void Step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads,
            double learning_rate) override;
};

// Bias-corrected Adam.
class AdamOptimizer : public Optimizer {
 public:
  AdamOptimizer(double beta1, double beta2, double epsilon)
      : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  void Step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads,
            double learning_rate) override;

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

std::unique_ptr<Optimizer> MakeOptimizer(const TrainConfig& config);

struct TrainResult {
  EmbeddingSet embeddings;
  std::vector<double> loss_history;  // mean step loss per epoch
};

// Called after every epoch with (epoch, mean loss, learning rate).
using EpochCallback = std::function<void(std::size_t, double, double)>;

// Full-batch training of `model` against the similarity target of `d`.
// Embedding rows follow graph.node_ids (or "0".."n-1" when absent). Throws
// kNumeric with the epoch index on a non-finite loss.
TrainResult Train(GnnModel& model, const MultiScaleGraph& graph, const Matrix& input,
                  const DistanceMatrix& d, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace trajsim

#endif  // TRAJSIM_TRAIN_H_

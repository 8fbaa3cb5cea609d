// Copyright 2026 The FedShield Authors
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

#pragma once

#include <cstdint>

#include "fedshield/dpftrl/noise_tree.hpp"

namespace fedshield::dpftrl {

// DP-FTRL server state in prefix-sum form. After t steps:
//   noisy_sum_t   = sum_{r<=t} aggregate_r + tree.cumulative_noise(t) / noise_denominator
//   momentum_t    = noisy_sum_t + momentum * momentum_{t-1}
//   checkpoint_t  = anchor + learning_rate * momentum_t
// With momentum 0 this is checkpoint_0 + lr * noisy prefix sum; with zero
// noise and lr 1 it is plain federated averaging.
class ServerOptimizerState {
 public:
  ServerOptimizerState(ParameterVector initial, double learning_rate, double momentum,
                       std::size_t noise_denominator);

  const ParameterVector& checkpoint() const { return checkpoint_; }
  const ParameterVector& anchor() const { return anchor_; }
  std::size_t steps() const { return steps_; }
  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }

  // Starts a fresh prefix sum anchored at the current checkpoint.
  void restart();

  friend ServerOptimizerState server_step(const ServerOptimizerState& state,
                                          const ParameterVector& aggregate,
                                          const NoiseTree& tree, std::size_t t);

 private:
  ParameterVector anchor_;
  ParameterVector checkpoint_;
  ParameterVector exact_sum_;
  ParameterVector momentum_sum_;
  double learning_rate_;
  double momentum_;
  std::size_t noise_denominator_;
  std::size_t steps_ = 0;
};

// `t` must equal state.steps() + 1.
ServerOptimizerState server_step(const ServerOptimizerState& state,
                                 const ParameterVector& aggregate, const NoiseTree& tree,
                                 std::size_t t);

}  // namespace fedshield::dpftrl

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

#include "fedshield/dpftrl/server_optimizer.hpp"

#include <string>

#include "fedshield/error.hpp"

namespace fedshield::dpftrl {

ServerOptimizerState::ServerOptimizerState(ParameterVector initial, double learning_rate,
                                           double momentum, std::size_t noise_denominator)
    : anchor_(initial),
      checkpoint_(std::move(initial)),
      exact_sum_(anchor_.size()),
      momentum_sum_(anchor_.size()),
      learning_rate_(learning_rate),
      momentum_(momentum),
      noise_denominator_(noise_denominator) {
  if (noise_denominator < 1) throw Error(ErrorCode::kInvalidArgument, "noise denominator must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "server momentum must be in [0, 1)");
}

void ServerOptimizerState::restart() {
  anchor_ = checkpoint_;
  exact_sum_ = ParameterVector(anchor_.size());
  momentum_sum_ = ParameterVector(anchor_.size());
  steps_ = 0;
}

ServerOptimizerState server_step(const ServerOptimizerState& state,
                                 const ParameterVector& aggregate, const NoiseTree& tree,
                                 std::size_t t) {
  const std::size_t d = state.anchor_.size();
  if (aggregate.size() != d || tree.dimension() != d)
    throw Error(ErrorCode::kInvalidArgument, "aggregate dimension mismatch");
  if (t != state.steps_ + 1)
    throw Error(ErrorCode::kInvalidArgument,
                "server step " + std::to_string(t) + " out of order (expected " +
                    std::to_string(state.steps_ + 1) + ")");
  ServerOptimizerState next = state;
  const auto noise = tree.cumulative_noise(t);
  const double inv_n = 1.0 / static_cast<double>(state.noise_denominator_);
  for (std::size_t i = 0; i < d; ++i) {
    next.exact_sum_[i] += aggregate[i];
    const double noisy = next.exact_sum_[i] + noise[i] * inv_n;
    next.momentum_sum_[i] = noisy + state.momentum_ * state.momentum_sum_[i];
    next.checkpoint_[i] = state.anchor_[i] + state.learning_rate_ * next.momentum_sum_[i];
  }
  next.steps_ = t;
  return next;
}

}  // namespace fedshield::dpftrl

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

#include "fedshield/dpftrl/noise_tree.hpp"

#include <random>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::dpftrl {

NoiseTree::NoiseTree(std::size_t horizon, std::size_t dimension, double node_std,
                     std::uint64_t seed)
    : horizon_(horizon), dimension_(dimension), node_std_(node_std), seed_(seed) {
  if (!(node_std >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "node noise std must be >= 0");
}

ParameterVector NoiseTree::node_noise(const TreeNode& node) const {
  ParameterVector out(dimension_);
  if (node_std_ == 0.0) return out;
  Rng rng(child_seed(seed_, "dpftrl/node", (std::uint64_t{node.level} << 48) | node.index));
  std::normal_distribution<double> gauss(0.0, node_std_);
  for (std::size_t i = 0; i < dimension_; ++i) out[i] = gauss(rng);
  return out;
}

std::vector<TreeNode> NoiseTree::prefix_nodes(std::size_t t) {
  std::vector<TreeNode> nodes;
  std::uint64_t start = 0;
  for (int level = 63; level >= 0; --level) {
    const std::uint64_t block = std::uint64_t{1} << level;
    if (t & block) {
      nodes.push_back(TreeNode{static_cast<unsigned>(level), start >> level});
      start += block;
    }
  }
  return nodes;
}

ParameterVector NoiseTree::cumulative_noise(std::size_t t) const {
  if (t < 1 || t > horizon_)
    throw Error(ErrorCode::kInvalidArgument,
                "tree step " + std::to_string(t) + " outside [1, " + std::to_string(horizon_) + "]");
  ParameterVector total(dimension_);
  if (node_std_ == 0.0) return total;
  for (const auto& node : prefix_nodes(t)) {
    const auto noise = node_noise(node);
    for (std::size_t i = 0; i < dimension_; ++i) total[i] += noise[i];
  }
  return total;
}

}  // namespace fedshield::dpftrl

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
#include <utility>
#include <vector>

#include "fedshield/model/model.hpp"

namespace fedshield::dpftrl {

using model::ParameterVector;

// Node (level, index) covers leaves [index * 2^level + 1, (index + 1) * 2^level].
struct TreeNode {
  unsigned level = 0;
  std::uint64_t index = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Binary tree of Gaussian noise over leaves 1..horizon. Node noise is a pure
// function of (seed, level, index): an mt19937_64 seeded with
// child_seed(seed, "dpftrl/node", (level << 48) | index) feeding
// std::normal_distribution(0, node_std).
class NoiseTree {
 public:
  NoiseTree(std::size_t horizon, std::size_t dimension, double node_std, std::uint64_t seed);

  std::size_t horizon() const { return horizon_; }
  std::size_t dimension() const { return dimension_; }
  double node_std() const { return node_std_; }

  ParameterVector node_noise(const TreeNode& node) const;

  // Dyadic decomposition of [1, t], largest block first: one node per set bit.
  static std::vector<TreeNode> prefix_nodes(std::size_t t);

  // Per-entry variance is node_std^2 * popcount(t).
  ParameterVector cumulative_noise(std::size_t t) const;

 private:
  std::size_t horizon_;
  std::size_t dimension_;
  double node_std_;
  std::uint64_t seed_;
};

inline ParameterVector tree_cumulative_noise(const NoiseTree& tree, std::size_t t) {
  return tree.cumulative_noise(t);
}

}  // namespace fedshield::dpftrl

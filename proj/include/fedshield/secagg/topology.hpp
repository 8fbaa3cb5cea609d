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
#include <vector>

namespace fedshield::secagg {

// Undirected simple graph over clients 0..n-1. Neighbor lists are sorted.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(std::vector<std::vector<std::uint32_t>> neighbors);

  static CommGraph complete(std::size_t n);

  std::size_t size() const { return neighbors_.size(); }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node) const {
    return neighbors_.at(node);
  }
  std::size_t degree(std::uint32_t node) const { return neighbors_.at(node).size(); }
  std::size_t min_degree() const;
  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  bool is_connected() const;
  bool is_complete() const;

 private:
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

// Random k-regular connected graph (one node gets degree k+1 when n*k is
// odd). k = n-1 yields the complete graph. Rejects t > k; gives up with
// TOPOLOGY_FAILED after 100 attempts.
CommGraph build_topology(std::size_t n, std::size_t k, std::size_t threshold,
                         std::uint64_t seed);

}  // namespace fedshield::secagg

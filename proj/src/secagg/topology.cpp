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

#include "fedshield/secagg/topology.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::secagg {

CommGraph::CommGraph(std::vector<std::vector<std::uint32_t>> neighbors)
    : neighbors_(std::move(neighbors)) {
  const auto n = neighbors_.size();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& list = neighbors_[i];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw Error(ErrorCode::kInvalidArgument, "duplicate edge in graph");
    for (auto j : list) {
      if (j == i) throw Error(ErrorCode::kInvalidArgument, "self-loop in graph");
      if (j >= n) throw Error(ErrorCode::kInvalidArgument, "neighbor index out of range");
    }
  }
  for (std::uint32_t i = 0; i < n; ++i)
    for (auto j : neighbors_[i])
      if (!has_edge(j, i)) throw Error(ErrorCode::kInvalidArgument, "graph is not undirected");
}

CommGraph CommGraph::complete(std::size_t n) {
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j)
      if (i != j) nbrs[i].push_back(j);
  return CommGraph(std::move(nbrs));
}

std::size_t CommGraph::min_degree() const {
  std::size_t m = neighbors_.empty() ? 0 : neighbors_[0].size();
  for (const auto& l : neighbors_) m = std::min(m, l.size());
  return m;
}

bool CommGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  const auto& l = neighbors_.at(a);
  return std::binary_search(l.begin(), l.end(), b);
}

bool CommGraph::is_connected() const {
  if (neighbors_.empty()) return true;
  std::vector<bool> seen(neighbors_.size(), false);
  std::vector<std::uint32_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : neighbors_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == neighbors_.size();
}

bool CommGraph::is_complete() const {
  for (const auto& l : neighbors_)
    if (l.size() + 1 != neighbors_.size()) return false;
  return true;
}

namespace {

// One attempt of random pairing: each node contributes `degree[v]` stubs;
// stubs are matched uniformly while rejecting loops and multi-edges.
std::optional<std::vector<std::vector<std::uint32_t>>> try_pairing(
    const std::vector<std::size_t>& degree, Rng& rng) {
  const std::size_t n = degree.size();
  std::vector<std::uint32_t> stubs;
  for (std::uint32_t v = 0; v < n; ++v) stubs.insert(stubs.end(), degree[v], v);
  std::vector<std::set<std::uint32_t>> adj(n);
  while (!stubs.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
    const std::size_t a = pick(rng);
    // Candidate partners for stub a, in index order; choose one uniformly.
    std::vector<std::size_t> candidates;
    for (std::size_t b = 0; b < stubs.size(); ++b) {
      if (b == a || stubs[b] == stubs[a] || adj[stubs[a]].count(stubs[b])) continue;
      candidates.push_back(b);
    }
    if (candidates.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick_b(0, candidates.size() - 1);
    const std::size_t b = candidates[pick_b(rng)];
    const auto u = stubs[a], v = stubs[b];
    adj[u].insert(v);
    adj[v].insert(u);
    stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
    stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(std::min(a, b)));
  }
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::uint32_t v = 0; v < n; ++v) out[v].assign(adj[v].begin(), adj[v].end());
  return out;
}

}  // namespace

CommGraph build_topology(std::size_t n, std::size_t k, std::size_t threshold,
                         std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "topology needs at least 2 nodes");
  if (k > n - 1) throw Error(ErrorCode::kInvalidArgument, "degree k must be <= n-1");
  if (threshold < 1 || threshold > k)
    throw Error(ErrorCode::kInvalidArgument,
                "infeasible topology: threshold " + std::to_string(threshold) +
                    " exceeds degree " + std::to_string(k));
  if (k == n - 1) return CommGraph::complete(n);

  Rng rng(seed);
  std::vector<std::size_t> degree(n, k);
  if ((n * k) % 2 == 1) {
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    ++degree[node(rng)];
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto adj = try_pairing(degree, rng);
    if (!adj) continue;
    CommGraph g(std::move(*adj));
    if (g.is_connected()) return g;
  }
  throw Error(ErrorCode::kTopologyFailed, "no connected k-regular graph after 100 attempts");
}

}  // namespace fedshield::secagg

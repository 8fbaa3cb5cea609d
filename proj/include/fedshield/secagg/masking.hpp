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

#include <functional>
#include <map>
#include <optional>
#include <span>

#include "fedshield/secagg/field.hpp"
#include "fedshield/secagg/keys.hpp"
#include "fedshield/secagg/topology.hpp"

namespace fedshield::secagg {

using MaskExpander = std::function<QuantizedVector(const Seed128&, std::size_t, FieldSpec)>;

// y_i = u_i + PRG(b_i) + sum_{j in nbrs, i < j} PRG(s_ij) - sum_{j in nbrs, j < i} PRG(s_ij)
// mod q. `secrets` is keyed by peer id and must cover every neighbor.
QuantizedVector mask_update(ClientId self, const QuantizedVector& input,
                            const std::optional<Seed128>& self_mask,
                            const std::map<ClientId, PairwiseSecret>& secrets,
                            std::span<const ClientId> neighbors,
                            const MaskExpander& expand = expand_mask);

inline QuantizedVector mask_update(ClientId self, const QuantizedVector& input,
                                   const std::optional<Seed128>& self_mask,
                                   const std::map<ClientId, PairwiseSecret>& secrets,
                                   const CommGraph& graph,
                                   const MaskExpander& expand = expand_mask) {
  return mask_update(self, input, self_mask, secrets, graph.neighbors(self), expand);
}

}  // namespace fedshield::secagg

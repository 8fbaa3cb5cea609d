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

#include "fedshield/secagg/masking.hpp"

#include <string>

#include "fedshield/error.hpp"

namespace fedshield::secagg {

QuantizedVector mask_update(ClientId self, const QuantizedVector& input,
                            const std::optional<Seed128>& self_mask,
                            const std::map<ClientId, PairwiseSecret>& secrets,
                            std::span<const ClientId> neighbors,
                            const MaskExpander& expand) {
  for (auto v : input.values)
    if (v > input.field.mask())
      throw Error(ErrorCode::kInvalidArgument, "input entry outside [0, q)");
  QuantizedVector y = input;
  if (self_mask) y.add_assign(expand(*self_mask, y.size(), y.field));
  for (ClientId j : neighbors) {
    auto it = secrets.find(j);
    if (it == secrets.end())
      throw Error(ErrorCode::kMissingSecret,
                  "client " + std::to_string(self) + " lacks pairwise secret with " +
                      std::to_string(j));
    const auto mask = expand(it->second.seed, y.size(), y.field);
    if (self < j) {
      y.add_assign(mask);
    } else {
      y.sub_assign(mask);
    }
  }
  return y;
}

}  // namespace fedshield::secagg

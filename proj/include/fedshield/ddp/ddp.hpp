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

// Distributed DP on the secure-sum wire: clip, scale, stochastically round,
// add Skellam noise per client, sum mod q, then decode and divide.

#include <cstdint>
#include <limits>

#include "fedshield/model/model.hpp"
#include "fedshield/secagg/field.hpp"

namespace fedshield::ddp {

using model::ParameterVector;
using secagg::FieldSpec;
using secagg::QuantizedVector;

inline constexpr double kNoRho = std::numeric_limits<double>::infinity();

struct DdpConfig {
  double clip_norm = 1.0;
  double scale = 1024.0;  // field units per model unit
  FieldSpec field;
  double mu = 0.0;           // Skellam(mu, mu) per entry, variance 2*mu
  std::size_t clients = 1;   // expected number of summed clients

  // Largest per-coordinate magnitude the modular sum can reach with
  // overwhelming probability:
  //   clients * (scale * clip_norm + 1) + 6 * sqrt(2 * mu * clients)
  // (rounding adds at most one unit per client; 6 sigma of the summed noise).
  double aggregate_bound() const;
  // Throws HEADROOM unless aggregate_bound() < q / 2, and INVALID_ARGUMENT for
  // nonpositive scale/clip or negative mu.
  void validate() const;
};

// Two's-complement style: negatives map to q - |v|.
std::uint32_t encode_centered(std::int64_t value, FieldSpec field);
std::int64_t decode_centered(std::uint32_t value, FieldSpec field);

// Unbiased stochastic rounding of scale * v, then centered encoding.
// Rejects ||v|| > clip_norm (plus 1e-9 slack).
QuantizedVector quantize(const ParameterVector& v, const DdpConfig& cfg, std::uint64_t seed);

// Adds Poisson(mu) - Poisson(mu) to every entry, mod q.
QuantizedVector add_discrete_noise(const QuantizedVector& qv, double mu, std::uint64_t seed);

// Decodes each entry and divides by (scale * survivor_count).
ParameterVector dequantize_sum(const QuantizedVector& sum, std::size_t survivor_count,
                               const DdpConfig& cfg);

// Per-round Gaussian approximation: (s*C)^2 / (2 * 2*mu * n_min). Returns
// kNoRho when mu == 0. Approximate; exact Skellam accounting is tighter.
double ddp_zcdp_contribution(const DdpConfig& cfg, std::size_t min_aggregation);

}  // namespace fedshield::ddp

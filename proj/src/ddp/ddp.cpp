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

#include "fedshield/ddp/ddp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::ddp {

double DdpConfig::aggregate_bound() const {
  const double n = static_cast<double>(clients);
  return n * (scale * clip_norm + 1.0) + 6.0 * std::sqrt(2.0 * mu * n);
}

void DdpConfig::validate() const {
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ddp scale must be > 0");
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ddp clip_norm must be > 0");
  if (!(mu >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ddp mu must be >= 0");
  if (clients < 1) throw Error(ErrorCode::kInvalidArgument, "ddp client count must be >= 1");
  const double half_q = static_cast<double>(field.modulus()) / 2.0;
  if (!(aggregate_bound() < half_q))
    throw Error(ErrorCode::kHeadroom,
                "aggregate bound " + std::to_string(aggregate_bound()) +
                    " does not fit below q/2 = " + std::to_string(half_q) +
                    " (reduce scale, clip_norm, mu or clients, or widen the field)");
}

std::uint32_t encode_centered(std::int64_t value, FieldSpec field) {
  const auto q = static_cast<std::int64_t>(field.modulus());
  std::int64_t r = value % q;
  if (r < 0) r += q;
  return static_cast<std::uint32_t>(r);
}

std::int64_t decode_centered(std::uint32_t value, FieldSpec field) {
  const auto q = static_cast<std::int64_t>(field.modulus());
  const auto v = static_cast<std::int64_t>(value & field.mask());
  return v >= q / 2 ? v - q : v;
}

QuantizedVector quantize(const ParameterVector& v, const DdpConfig& cfg, std::uint64_t seed) {
  if (v.l2_norm() > cfg.clip_norm + 1e-9)
    throw Error(ErrorCode::kInvalidArgument, "update norm exceeds clip_norm; clip before quantizing");
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  QuantizedVector out{cfg.field, std::vector<std::uint32_t>(v.size())};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = cfg.scale * v[i];
    const double lo = std::floor(x);
    // Always draw so the stream position does not depend on the data.
    const double u = uniform(rng);
    const auto rounded = static_cast<std::int64_t>(lo) + (u < x - lo ? 1 : 0);
    out.values[i] = encode_centered(rounded, cfg.field);
  }
  return out;
}

QuantizedVector add_discrete_noise(const QuantizedVector& qv, double mu, std::uint64_t seed) {
  if (!(mu >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "mu must be >= 0");
  if (mu == 0.0) return qv;
  Rng rng(seed);
  std::poisson_distribution<std::int64_t> poisson(mu);
  QuantizedVector out = qv;
  for (auto& value : out.values) {
    const std::int64_t noise = poisson(rng) - poisson(rng);
    value = qv.field.add(value, encode_centered(noise, qv.field));
  }
  return out;
}

ParameterVector dequantize_sum(const QuantizedVector& sum, std::size_t survivor_count,
                               const DdpConfig& cfg) {
  if (survivor_count == 0) throw Error(ErrorCode::kInvalidArgument, "survivor count must be >= 1");
  const double denom = cfg.scale * static_cast<double>(survivor_count);
  ParameterVector out(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i)
    out[i] = static_cast<double>(decode_centered(sum.values[i], sum.field)) / denom;
  return out;
}

double ddp_zcdp_contribution(const DdpConfig& cfg, std::size_t min_aggregation) {
  if (!(cfg.mu >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "mu must be >= 0");
  if (min_aggregation < 1) throw Error(ErrorCode::kInvalidArgument, "min_aggregation must be >= 1");
  if (cfg.mu == 0.0) return kNoRho;
  const double sensitivity = cfg.scale * cfg.clip_norm;
  const double total_variance = 2.0 * cfg.mu * static_cast<double>(min_aggregation);
  return sensitivity * sensitivity / (2.0 * total_variance);
}

}  // namespace fedshield::ddp

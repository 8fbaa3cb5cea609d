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
#include <span>
#include <vector>

#include "fedshield/secagg/field.hpp"

namespace fedshield::secagg {

enum class SecretKind { kSelfMaskSeed, kPairwiseKey };

struct SecretShare {
  std::uint32_t holder = 0;  // evaluation point x >= 1
  std::uint64_t value = 0;   // f(x) mod p
  std::uint32_t owner = 0;
  SecretKind kind = SecretKind::kSelfMaskSeed;
};

// Evaluates the polynomial with the given coefficients (constant term first)
// at every point in `holders`.
std::vector<SecretShare> share_polynomial(std::span<const std::uint64_t> coefficients,
                                          std::span<const std::uint32_t> holders,
                                          const PrimeField& field);

// Random degree t-1 polynomial with f(0) = secret, evaluated at `holders`.
std::vector<SecretShare> shamir_share_at(std::uint64_t secret,
                                         std::span<const std::uint32_t> holders,
                                         std::size_t threshold, std::uint64_t seed,
                                         const PrimeField& field);

// Shares evaluated at x = 1..n.
std::vector<SecretShare> shamir_share(std::uint64_t secret, std::size_t n,
                                      std::size_t threshold, std::uint64_t seed,
                                      const PrimeField& field);

// Lagrange interpolation at 0 over the first `threshold` shares. Rejects
// duplicate holders anywhere in `shares` and fewer than `threshold` shares.
std::uint64_t shamir_reconstruct(std::span<const SecretShare> shares, std::size_t threshold,
                                 const PrimeField& field);

}  // namespace fedshield::secagg

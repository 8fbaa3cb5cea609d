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

#include "fedshield/secagg/shamir.hpp"

#include <random>
#include <set>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::secagg {

std::vector<SecretShare> share_polynomial(std::span<const std::uint64_t> coefficients,
                                          std::span<const std::uint32_t> holders,
                                          const PrimeField& field) {
  std::vector<SecretShare> shares;
  shares.reserve(holders.size());
  for (std::uint32_t x : holders) {
    if (x == 0 || x >= field.modulus())
      throw Error(ErrorCode::kInvalidArgument, "share holder index must be in [1, p)");
    // Horner evaluation.
    std::uint64_t y = 0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it)
      y = field.add(field.mul(y, x), field.reduce(*it));
    shares.push_back(SecretShare{x, y, 0, SecretKind::kSelfMaskSeed});
  }
  return shares;
}

std::vector<SecretShare> shamir_share_at(std::uint64_t secret,
                                         std::span<const std::uint32_t> holders,
                                         std::size_t threshold, std::uint64_t seed,
                                         const PrimeField& field) {
  if (threshold < 1 || threshold > holders.size())
    throw Error(ErrorCode::kInvalidArgument, "threshold must satisfy 1 <= t <= n");
  if (holders.size() >= field.modulus())
    throw Error(ErrorCode::kInvalidArgument, "share count must be below the field modulus");
  if (secret >= field.modulus())
    throw Error(ErrorCode::kInvalidArgument, "secret must be reduced mod p");
  Rng rng(seed);
  std::uniform_int_distribution<std::uint64_t> coef(0, field.modulus() - 1);
  std::vector<std::uint64_t> coefficients{secret};
  for (std::size_t i = 1; i < threshold; ++i) coefficients.push_back(coef(rng));
  return share_polynomial(coefficients, holders, field);
}

std::vector<SecretShare> shamir_share(std::uint64_t secret, std::size_t n,
                                      std::size_t threshold, std::uint64_t seed,
                                      const PrimeField& field) {
  std::vector<std::uint32_t> holders(n);
  for (std::size_t i = 0; i < n; ++i) holders[i] = static_cast<std::uint32_t>(i + 1);
  return shamir_share_at(secret, holders, threshold, seed, field);
}

std::uint64_t shamir_reconstruct(std::span<const SecretShare> shares, std::size_t threshold,
                                 const PrimeField& field) {
  std::set<std::uint32_t> seen;
  for (const auto& s : shares) {
    if (!seen.insert(s.holder).second)
      throw Error(ErrorCode::kDuplicateShareIndex,
                  "duplicate share index " + std::to_string(s.holder));
  }
  if (threshold < 1 || shares.size() < threshold)
    throw Error(ErrorCode::kInsufficientShares,
                "have " + std::to_string(shares.size()) + " shares, need " +
                    std::to_string(threshold));
  const auto used = shares.first(threshold);
  std::uint64_t secret = 0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    // Lagrange basis at 0: prod_{j != i} x_j / (x_j - x_i).
    std::uint64_t num = 1, den = 1;
    const std::uint64_t xi = used[i].holder;
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (j == i) continue;
      const std::uint64_t xj = used[j].holder;
      num = field.mul(num, xj);
      den = field.mul(den, field.sub(xj, xi));
    }
    secret = field.add(secret, field.mul(used[i].value, field.mul(num, field.inv(den))));
  }
  return secret;
}

}  // namespace fedshield::secagg

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

// Simulation-grade key agreement and mask expansion.
//
// NOT SECURE FOR PRODUCTION. Key agreement is Diffie-Hellman in the
// multiplicative group modulo the 61-bit Mersenne prime, with secret keys
// derived from a seed. The structure mirrors a real deployment (each pair of
// clients derives the same 128-bit mask seed without talking to the server),
// but the group is far too small to resist discrete-log attacks.
//
// Derivations, bit-exact. H(label, data) is unkeyed BLAKE2b with a 16-byte
// digest over (label bytes || 0x00 || data); u64 values are little-endian and
// "first8" reads the first 8 digest bytes as a little-endian u64.
//   secret_key(id, seed)  = 1 + first8(H("fedshield/keygen", le64(seed) || le32(id))) mod (p - 2)
//   public_key            = g^secret_key mod p,  g = 37, p = 2^61 - 1
//   shared(a, b)          = public_key_b ^ secret_key_a mod p
//   pairwise_seed(a, b)   = H("fedshield/pairwise", le64(shared) || le32(min) || le32(max))
//   self_mask_secret(id, seed) = first8(H("fedshield/self-mask", le64(seed) || le32(id))) mod p
//   self_mask_seed(b)     = H("fedshield/self-mask-prg", le64(b))

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "fedshield/secagg/field.hpp"

namespace fedshield::secagg {

using ClientId = std::uint32_t;

struct Seed128 {
  std::array<std::uint8_t, 16> bytes{};

  static Seed128 from_u64(std::uint64_t low, std::uint64_t high = 0);
  std::string hex() const;

  friend auto operator<=>(const Seed128&, const Seed128&) = default;
};

inline constexpr std::uint64_t kKeyGenerator = 37;

struct PublicKey {
  ClientId client_id = 0;
  std::uint64_t value = 0;
};

struct KeyPair {
  ClientId client_id = 0;
  std::uint64_t secret_key = 0;  // in [1, p - 2]
  std::uint64_t public_key = 0;

  PublicKey public_part() const { return {client_id, public_key}; }
};

struct PairwiseSecret {
  ClientId low = 0;
  ClientId high = 0;
  Seed128 seed;
};

// Domain-separated BLAKE2b-128.
Seed128 hash128(std::string_view label, std::span<const std::uint8_t> data);

KeyPair keygen(ClientId client_id, std::uint64_t seed);
KeyPair keypair_from_secret(ClientId client_id, std::uint64_t secret_key);
PairwiseSecret derive_pairwise(const KeyPair& me, const PublicKey& peer);
// Same seed computed from a recovered secret key (server-side unmasking).
PairwiseSecret derive_pairwise(ClientId me, std::uint64_t secret_key, const PublicKey& peer);

std::uint64_t self_mask_secret(ClientId client_id, std::uint64_t seed);
Seed128 self_mask_seed(std::uint64_t self_mask_secret);

// ChaCha20 (RFC 8439) keystream with key = seed || seed, a 12-byte zero nonce
// and initial block counter 0. Entry i is the little-endian u32 at keystream
// bytes [4i, 4i + 4), reduced mod q by keeping the low `bits` bits. No
// rejection sampling is needed because q is a power of two.
QuantizedVector expand_mask(const Seed128& seed, std::size_t dimension, FieldSpec field);

// First 8 bytes of BLAKE2b-128 over `payload`, hex encoded.
std::string payload_digest(std::span<const std::uint8_t> payload);

}  // namespace fedshield::secagg

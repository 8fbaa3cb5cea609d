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

#include "fedshield/secagg/keys.hpp"

#include <sodium.h>

#include <vector>

#include "fedshield/error.hpp"

namespace fedshield::secagg {
namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw Error(ErrorCode::kInvalidArgument, "libsodium failed to initialize");
    return true;
  }();
  (void)ready;
}

void append_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t first8(const Seed128& s) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s.bytes[i]) << (8 * i);
  return v;
}

const PrimeField& key_field() {
  static const PrimeField field(PrimeField::kMersenne61);
  return field;
}

}  // namespace

Seed128 Seed128::from_u64(std::uint64_t low, std::uint64_t high) {
  Seed128 s;
  for (int i = 0; i < 8; ++i) {
    s.bytes[i] = static_cast<std::uint8_t>(low >> (8 * i));
    s.bytes[8 + i] = static_cast<std::uint8_t>(high >> (8 * i));
  }
  return s;
}

std::string Seed128::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

Seed128 hash128(std::string_view label, std::span<const std::uint8_t> data) {
  ensure_sodium();
  std::vector<std::uint8_t> message(label.begin(), label.end());
  message.push_back(0);
  message.insert(message.end(), data.begin(), data.end());
  Seed128 out;
  crypto_generichash(out.bytes.data(), out.bytes.size(), message.data(), message.size(),
                     nullptr, 0);
  return out;
}

KeyPair keypair_from_secret(ClientId client_id, std::uint64_t secret_key) {
  const auto& f = key_field();
  if (secret_key == 0 || secret_key >= f.modulus() - 1)
    throw Error(ErrorCode::kInvalidArgument, "secret key out of range");
  return KeyPair{client_id, secret_key, f.pow(kKeyGenerator, secret_key)};
}

KeyPair keygen(ClientId client_id, std::uint64_t seed) {
  std::vector<std::uint8_t> data;
  append_le(data, seed, 8);
  append_le(data, client_id, 4);
  const std::uint64_t sk =
      1 + first8(hash128("fedshield/keygen", data)) % (key_field().modulus() - 2);
  return keypair_from_secret(client_id, sk);
}

PairwiseSecret derive_pairwise(ClientId me, std::uint64_t secret_key, const PublicKey& peer) {
  if (me == peer.client_id)
    throw Error(ErrorCode::kInvalidArgument, "cannot derive a pairwise secret with oneself");
  const std::uint64_t shared = key_field().pow(peer.value, secret_key);
  PairwiseSecret out;
  out.low = std::min(me, peer.client_id);
  out.high = std::max(me, peer.client_id);
  std::vector<std::uint8_t> data;
  append_le(data, shared, 8);
  append_le(data, out.low, 4);
  append_le(data, out.high, 4);
  out.seed = hash128("fedshield/pairwise", data);
  return out;
}

PairwiseSecret derive_pairwise(const KeyPair& me, const PublicKey& peer) {
  return derive_pairwise(me.client_id, me.secret_key, peer);
}

std::uint64_t self_mask_secret(ClientId client_id, std::uint64_t seed) {
  std::vector<std::uint8_t> data;
  append_le(data, seed, 8);
  append_le(data, client_id, 4);
  return first8(hash128("fedshield/self-mask", data)) % key_field().modulus();
}

Seed128 self_mask_seed(std::uint64_t secret) {
  std::vector<std::uint8_t> data;
  append_le(data, secret, 8);
  return hash128("fedshield/self-mask-prg", data);
}

QuantizedVector expand_mask(const Seed128& seed, std::size_t dimension, FieldSpec field) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_KEYBYTES> key{};
  std::copy(seed.bytes.begin(), seed.bytes.end(), key.begin());
  std::copy(seed.bytes.begin(), seed.bytes.end(), key.begin() + 16);
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  std::vector<std::uint8_t> stream(4 * dimension);
  if (!stream.empty())
    crypto_stream_chacha20_ietf(stream.data(), stream.size(), nonce.data(), key.data());
  QuantizedVector out{field, std::vector<std::uint32_t>(dimension)};
  const std::uint32_t mask = field.mask();
  for (std::size_t i = 0; i < dimension; ++i) {
    const std::uint32_t word = static_cast<std::uint32_t>(stream[4 * i]) |
                               static_cast<std::uint32_t>(stream[4 * i + 1]) << 8 |
                               static_cast<std::uint32_t>(stream[4 * i + 2]) << 16 |
                               static_cast<std::uint32_t>(stream[4 * i + 3]) << 24;
    out.values[i] = word & mask;
  }
  return out;
}

std::string payload_digest(std::span<const std::uint8_t> payload) {
  return hash128("fedshield/digest", payload).hex().substr(0, 16);
}

}  // namespace fedshield::secagg

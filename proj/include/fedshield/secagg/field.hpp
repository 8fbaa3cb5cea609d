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

// Arithmetic modulo an odd prime below 2^63. The protocol uses the Mersenne
// prime 2^61 - 1; tests also instantiate small primes such as 257.
class PrimeField {
 public:
  static constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

  explicit PrimeField(std::uint64_t modulus = kMersenne61);

  std::uint64_t modulus() const { return p_; }
  std::uint64_t reduce(std::uint64_t a) const { return a % p_; }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    const std::uint64_t s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return a >= b ? a - b : a + p_ - b;
  }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p_);
  }
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
  std::uint64_t inv(std::uint64_t a) const;  // a != 0

 private:
  std::uint64_t p_;
};

// Power-of-two modulus q = 2^bits for wire vectors.
struct FieldSpec {
  unsigned bits = 32;

  static FieldSpec make(unsigned bits);
  std::uint64_t modulus() const { return std::uint64_t{1} << bits; }
  std::uint32_t mask() const { return static_cast<std::uint32_t>(modulus() - 1); }
  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint32_t>((std::uint64_t{a} + b) & mask());
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint32_t>((std::uint64_t{a} + modulus() - b) & mask());
  }

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

// Integer vector in Z_q; every entry is in [0, q).
struct QuantizedVector {
  FieldSpec field;
  std::vector<std::uint32_t> values;

  std::size_t size() const { return values.size(); }
  void add_assign(const QuantizedVector& other);
  void sub_assign(const QuantizedVector& other);

  friend bool operator==(const QuantizedVector&, const QuantizedVector&) = default;
};

}  // namespace fedshield::secagg

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

#include "fedshield/secagg/field.hpp"

#include <string>

#include "fedshield/error.hpp"

namespace fedshield::secagg {

PrimeField::PrimeField(std::uint64_t modulus) : p_(modulus) {
  if (modulus < 3 || modulus % 2 == 0 || modulus >= (std::uint64_t{1} << 63))
    throw Error(ErrorCode::kInvalidArgument, "prime modulus must be odd and in [3, 2^63)");
}

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t exp) const {
  std::uint64_t result = 1 % p_;
  base %= p_;
  while (exp) {
    if (exp & 1) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return result;
}

std::uint64_t PrimeField::inv(std::uint64_t a) const {
  if (a % p_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero has no inverse");
  return pow(a, p_ - 2);
}

FieldSpec FieldSpec::make(unsigned bits) {
  if (bits < 1 || bits > 32)
    throw Error(ErrorCode::kInvalidArgument, "field bit width must be in [1, 32], got " + std::to_string(bits));
  return FieldSpec{bits};
}

void QuantizedVector::add_assign(const QuantizedVector& other) {
  if (other.field != field || other.size() != size())
    throw Error(ErrorCode::kInvalidArgument, "quantized vector shape mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = field.add(values[i], other.values[i]);
}

void QuantizedVector::sub_assign(const QuantizedVector& other) {
  if (other.field != field || other.size() != size())
    throw Error(ErrorCode::kInvalidArgument, "quantized vector shape mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = field.sub(values[i], other.values[i]);
}

}  // namespace fedshield::secagg

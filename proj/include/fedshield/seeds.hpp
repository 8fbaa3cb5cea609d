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
#include <random>
#include <string_view>

namespace fedshield {

// Seed fan-out. Every random stream in an experiment is keyed by
//
//   child_seed(master, label, index) =
//       splitmix64(splitmix64(master ^ fnv1a64(label)) + index)
//
// where fnv1a64 is 64-bit FNV-1a over the label's bytes (offset basis
// 0xcbf29ce484222325, prime 0x100000001b3) and splitmix64 is the standard
// SplitMix64 finalizer (increment 0x9e3779b97f4a7c15, multipliers
// 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb, shifts 30/27/31). All
// arithmetic wraps modulo 2^64.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t child_seed(std::uint64_t master, std::string_view label,
                         std::uint64_t index = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace fedshield

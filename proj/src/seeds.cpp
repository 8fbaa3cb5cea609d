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

#include "fedshield/seeds.hpp"

#include "fedshield/error.hpp"

namespace fedshield {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t child_seed(std::uint64_t master, std::string_view label,
                         std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a64(label)) + index);
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kEmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::kPopulationExhausted: return "POPULATION_EXHAUSTED";
    case ErrorCode::kInsufficientShares: return "INSUFFICIENT_SHARES";
    case ErrorCode::kDuplicateShareIndex: return "DUPLICATE_SHARE_INDEX";
    case ErrorCode::kBothKindsRevealed: return "BOTH_KINDS_REVEALED";
    case ErrorCode::kMissingSecret: return "MISSING_SECRET";
    case ErrorCode::kTopologyFailed: return "TOPOLOGY_FAILED";
    case ErrorCode::kHeadroom: return "HEADROOM";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace fedshield

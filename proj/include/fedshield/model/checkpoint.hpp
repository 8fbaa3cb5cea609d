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
#include <filesystem>
#include <string>

#include "fedshield/model/model.hpp"

namespace fedshield::model {

// Binary checkpoint, all little-endian:
//   bytes 0..3   magic "FSHD"
//   bytes 4..5   format version (u16, currently 1)
//   bytes 6..7   reserved, zero
//   bytes 8..15  parameter count d (u64)
//   then d IEEE-754 binary32 values in flattening order.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::string encode_checkpoint(const ParameterVector& params);
ParameterVector decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const ParameterVector& params);
ParameterVector read_checkpoint(const std::filesystem::path& path);

}  // namespace fedshield::model

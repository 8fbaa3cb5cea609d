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

#include "fedshield/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fedshield/error.hpp"

namespace fedshield::model {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

std::string encode_checkpoint(const ParameterVector& params) {
  std::string out = "FSHD";
  put_le<std::uint16_t>(out, kCheckpointVersion);
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint64_t>(out, params.size());
  out.reserve(16 + 4 * params.size());
  for (double v : params) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

ParameterVector decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "FSHD") != 0)
    throw Error(ErrorCode::kIo, "not a checkpoint (bad magic)");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kIo, "unsupported checkpoint version " + std::to_string(version));
  const auto d = get_le<std::uint64_t>(bytes, 8);
  if (bytes.size() != 16 + 4 * d) throw Error(ErrorCode::kIo, "checkpoint size does not match header");
  std::vector<double> values(d);
  for (std::size_t i = 0; i < d; ++i)
    values[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, 16 + 4 * i));
  return ParameterVector(std::move(values));
}

void write_checkpoint(const std::filesystem::path& path, const ParameterVector& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  const auto bytes = encode_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

ParameterVector read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace fedshield::model

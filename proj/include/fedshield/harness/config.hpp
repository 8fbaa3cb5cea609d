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

// Experiment configuration.
//
// File grammar (one entry per line):
//   line    := blank | comment | entry
//   comment := optional spaces, '#', anything
//   entry   := key '=' value        (spaces around key and value are trimmed)
//   key     := section '.' name | name, using [a-z0-9_.]
// Keys are unique; unknown keys are errors. Lists are comma separated.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace fedshield::harness {

enum class Mode { kBaseline, kDpOnly, kSecAggOnly, kDpSecAggDdp };

std::string mode_name(Mode mode);
bool mode_uses_dp(Mode mode);
bool mode_uses_secagg(Mode mode);

struct ExperimentConfig {
  Mode mode = Mode::kBaseline;
  std::uint64_t seed = 1;

  std::string corpus_path;  // default: bundled corpus
  std::size_t users = 100;

  std::size_t vocab_size = 50;
  std::size_t embed_dim = 16;

  std::size_t rounds = 50;
  int local_epochs = 1;
  double client_lr = 0.1;
  double server_lr = 1.0;
  double server_momentum = 0.0;
  std::size_t pretrain_steps = 0;
  double pretrain_lr = 0.1;

  std::size_t report_goal = 20;
  std::size_t min_aggregation = 10;
  std::size_t min_separation = 4;
  double dropout_rate = 0.0;

  double clip_norm = 1.0;
  double noise_multiplier = 0.0;
  std::size_t restart_every = 0;
  double budget = std::numeric_limits<double>::infinity();  // inf = no gate
  std::vector<double> deltas{1e-10};

  unsigned secagg_bits = 32;
  std::size_t secagg_threshold = 0;
  std::size_t secagg_degree = 0;
  std::string secagg_transcript;

  double ddp_scale = 1024.0;
  double ddp_mu = 0.0;

  std::size_t top_k = 3;
  double compare_tolerance = 0.01;
  bool record_wall_time = true;
  std::string output_dir = "out";

  // Cross-field checks. Throws CONFIG (or HEADROOM) naming the fields.
  void validate() const;

  // Every key with its effective value, one `key = value` per line, sorted.
  std::string effective_text() const;
  std::map<std::string, std::string> to_map() const;
};

std::string default_corpus_path();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fedshield::harness

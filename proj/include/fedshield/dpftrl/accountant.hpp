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

// User-level zCDP accounting for tree-aggregated DP-FTRL.
//
// A user's contribution in one round enters at most h = ceil(log2 T) + 1 tree
// nodes. Each node is a Gaussian mechanism with sensitivity C and noise
// z * C, i.e. 1 / (2 z^2) zCDP. Composition over nodes and over at most k_max
// participations gives rho = k_max * h / (2 z^2). No amplification by
// sampling is claimed.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace fedshield::dpftrl {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// ceil(log2 T) + 1, and 0 for T = 0.
std::size_t tree_height(std::size_t horizon);

// ceil(T / min_separation); min_separation 0 is treated as 1.
std::size_t max_participations(std::size_t horizon, std::size_t min_separation);

// Rejects z <= 0. Returns 0 for T = 0 or z = +inf.
double account_zcdp(double clip_norm, double noise_multiplier, std::size_t horizon,
                    std::size_t k_max);

// Composes account_zcdp over consecutive tree segments of length
// `restart_every` (0 = a single tree); each segment uses its own k_max.
double account_zcdp_with_restarts(double clip_norm, double noise_multiplier,
                                  std::size_t horizon, std::size_t min_separation,
                                  std::size_t restart_every);

// epsilon = rho + 2 sqrt(rho ln(1/delta)). Rejects delta outside (0, 1).
double zcdp_to_eps(double rho, double delta);

enum class Verdict { kPass, kFail };

struct LedgerInputs {
  double clip_norm = 1.0;
  double noise_multiplier = 0.0;  // 0 = no central noise
  std::size_t rounds = 0;
  std::size_t min_separation = 1;
  std::size_t restart_every = 0;
  // Per-round DDP contribution; nullopt when the DDP layer is not in use.
  std::optional<double> ddp_rho_per_round;
  std::vector<double> deltas{1e-10};
  double budget = kUnbounded;
};

struct PrivacyLedger {
  double clip_norm = 0.0;
  double noise_multiplier = 0.0;
  std::size_t rounds = 0;
  std::size_t min_separation = 0;
  std::size_t k_max = 0;
  double rho_central = kUnbounded;
  bool ddp_configured = false;
  double rho_ddp = kUnbounded;
  double total_rho = kUnbounded;
  std::vector<std::pair<double, double>> conversions;  // (delta, epsilon)
  double budget = kUnbounded;
  Verdict verdict = Verdict::kPass;

  // Completed rounds seen by the orchestrator; not serialized.
  std::size_t rounds_recorded = 0;
  void record_round() { ++rounds_recorded; }
};

// Central rho is unbounded when z == 0. The DDP term is k_max times the
// per-round value. The total adds the finite terms of configured mechanisms
// and is unbounded only if none is finite.
PrivacyLedger build_ledger(const LedgerInputs& inputs);

// PASS iff total_rho <= budget (inclusive).
Verdict check_budget(const PrivacyLedger& ledger, double budget);

// Unbounded values serialize as null.
nlohmann::json ledger_to_json(const PrivacyLedger& ledger);

std::string verdict_name(Verdict v);

}  // namespace fedshield::dpftrl

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

#include "fedshield/dpftrl/accountant.hpp"

#include <bit>
#include <cmath>

#include "fedshield/error.hpp"

namespace fedshield::dpftrl {

std::size_t tree_height(std::size_t horizon) {
  if (horizon == 0) return 0;
  // ceil(log2 T) == bit width of (T - 1).
  return static_cast<std::size_t>(std::bit_width(horizon - 1)) + 1;
}

std::size_t max_participations(std::size_t horizon, std::size_t min_separation) {
  const std::size_t sep = std::max<std::size_t>(min_separation, 1);
  return (horizon + sep - 1) / sep;
}

double account_zcdp(double clip_norm, double noise_multiplier, std::size_t horizon,
                    std::size_t k_max) {
  if (!(noise_multiplier > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "noise multiplier must be > 0");
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip norm must be > 0");
  if (horizon == 0 || std::isinf(noise_multiplier)) return 0.0;
  // Sensitivity C against node noise z*C: the clip norm cancels.
  const double per_node = 1.0 / (2.0 * noise_multiplier * noise_multiplier);
  return static_cast<double>(k_max) * static_cast<double>(tree_height(horizon)) * per_node;
}

double account_zcdp_with_restarts(double clip_norm, double noise_multiplier,
                                  std::size_t horizon, std::size_t min_separation,
                                  std::size_t restart_every) {
  if (restart_every == 0 || restart_every >= horizon)
    return account_zcdp(clip_norm, noise_multiplier, horizon,
                        max_participations(horizon, min_separation));
  double rho = 0.0;
  for (std::size_t start = 0; start < horizon; start += restart_every) {
    const std::size_t len = std::min(restart_every, horizon - start);
    rho += account_zcdp(clip_norm, noise_multiplier, len, max_participations(len, min_separation));
  }
  return rho;
}

double zcdp_to_eps(double rho, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be in (0, 1)");
  if (!(rho >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be >= 0");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

PrivacyLedger build_ledger(const LedgerInputs& in) {
  PrivacyLedger l;
  l.clip_norm = in.clip_norm;
  l.noise_multiplier = in.noise_multiplier;
  l.rounds = in.rounds;
  l.min_separation = in.min_separation;
  l.k_max = max_participations(in.rounds, in.min_separation);
  l.budget = in.budget;

  if (in.noise_multiplier > 0.0) {
    l.rho_central = account_zcdp_with_restarts(in.clip_norm, in.noise_multiplier, in.rounds,
                                               in.min_separation, in.restart_every);
  } else if (in.rounds == 0) {
    l.rho_central = 0.0;
  }
  l.ddp_configured = in.ddp_rho_per_round.has_value();
  if (l.ddp_configured && std::isfinite(*in.ddp_rho_per_round))
    l.rho_ddp = static_cast<double>(l.k_max) * *in.ddp_rho_per_round;

  const bool central_finite = std::isfinite(l.rho_central);
  const bool ddp_finite = l.ddp_configured && std::isfinite(l.rho_ddp);
  if (central_finite || ddp_finite)
    l.total_rho = (central_finite ? l.rho_central : 0.0) + (ddp_finite ? l.rho_ddp : 0.0);

  for (double delta : in.deltas)
    l.conversions.emplace_back(delta, std::isfinite(l.total_rho) ? zcdp_to_eps(l.total_rho, delta)
                                                                 : kUnbounded);
  l.verdict = check_budget(l, in.budget);
  return l;
}

Verdict check_budget(const PrivacyLedger& ledger, double budget) {
  if (std::isinf(budget) && budget > 0) return Verdict::kPass;
  return ledger.total_rho <= budget ? Verdict::kPass : Verdict::kFail;
}

std::string verdict_name(Verdict v) { return v == Verdict::kPass ? "PASS" : "FAIL"; }

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json ledger_to_json(const PrivacyLedger& l) {
  nlohmann::json j;
  j["C"] = l.clip_norm;
  j["z"] = l.noise_multiplier;
  j["T"] = l.rounds;
  j["min_separation"] = l.min_separation;
  j["k_max"] = l.k_max;
  j["rho_central"] = number_or_null(l.rho_central);
  j["rho_ddp"] = number_or_null(l.rho_ddp);
  j["total_rho"] = number_or_null(l.total_rho);
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& [delta, eps] : l.conversions)
    conv.push_back({{"delta", delta}, {"eps", number_or_null(eps)}});
  j["conversions"] = conv;
  j["budget"] = number_or_null(l.budget);
  j["verdict"] = verdict_name(l.verdict);
  return j;
}

}  // namespace fedshield::dpftrl

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

#include "fedshield/federation/federation.hpp"

#include <algorithm>
#include <chrono>
#include <iterator>
#include <random>
#include <set>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::federation {

Population::Population(std::vector<LocalDataset> clients)
    : clients_(std::move(clients)), last_participation_(clients_.size()) {
  std::set<std::string> ids;
  for (const auto& c : clients_)
    if (!ids.insert(c.user_id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate user id in population");
}

bool Population::eligible(std::size_t index, std::int64_t round,
                          std::size_t min_separation) const {
  const auto& last = last_participation_.at(index);
  return !last || *last <= round - static_cast<std::int64_t>(min_separation);
}

void Population::record_participation(const std::vector<std::size_t>& clients,
                                       std::int64_t round) {
  for (auto c : clients) {
    last_participation_.at(c) = round;
    audit_.push_back(ParticipationRecord{round, c});
  }
}

void RoundPlan::validate() const {
  if (round_index < 1) throw Error(ErrorCode::kInvalidArgument, "round_index must be >= 1");
  if (min_aggregation < 1 || report_goal < min_aggregation || cohort.size() < report_goal)
    throw Error(ErrorCode::kInvalidArgument,
                "round plan requires cohort size >= report_goal >= min_aggregation >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "dropout_rate must be in [0, 1)");
  if (std::set<std::size_t>(cohort.begin(), cohort.end()).size() != cohort.size())
    throw Error(ErrorCode::kInvalidArgument, "duplicate client in cohort");
}

RoundPlan sample_cohort(const Population& pop, std::int64_t round, std::size_t report_goal,
                        std::size_t min_separation, std::uint64_t seed,
                        std::size_t min_aggregation, double dropout_rate) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (pop.eligible(i, round, min_separation)) eligible.push_back(i);
  if (eligible.size() < report_goal)
    throw Error(ErrorCode::kPopulationExhausted,
                std::to_string(eligible.size()) + " eligible clients, report_goal " +
                    std::to_string(report_goal));
  RoundPlan plan;
  plan.round_index = round;
  plan.report_goal = report_goal;
  plan.min_aggregation = min_aggregation;
  plan.dropout_rate = dropout_rate;
  Rng rng(seed);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(plan.cohort), report_goal,
              rng);
  plan.validate();
  return plan;
}

std::vector<std::size_t> simulate_dropouts(const RoundPlan& plan, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::size_t> survivors;
  for (auto c : plan.cohort)
    if (uniform(rng) >= plan.dropout_rate) survivors.push_back(c);
  return survivors;
}

Decision enforce_min_aggregation(std::size_t survivor_count, std::size_t min_aggregation) {
  return survivor_count >= min_aggregation ? Decision::kProceed : Decision::kAbort;
}

SealedUpdate run_client(const ModelShape& shape, const ParameterVector& checkpoint,
                        const LocalDataset& data, const ClientConfig& config,
                        std::uint64_t seed, std::int64_t round_index) {
  auto update = model::local_train(shape, checkpoint, data, config.epochs, config.learning_rate,
                                   seed, round_index);
  update.delta = model::clip_update(update.delta, config.clip_norm);
  return SealedUpdate(std::move(update));
}

Aggregate PlainMeanBackend::aggregate(std::vector<std::optional<SealedUpdate>> cohort,
                                      std::int64_t, std::uint64_t) {
  Aggregate out;
  for (const auto& slot : cohort) {
    if (!slot) continue;
    const auto& delta = open(*slot).delta;
    if (out.count == 0) out.mean = ParameterVector(delta.size());
    if (delta.size() != out.mean.size())
      throw Error(ErrorCode::kInvalidArgument, "client update dimension mismatch");
    for (std::size_t i = 0; i < delta.size(); ++i) out.mean[i] += delta[i];
    ++out.count;
  }
  if (out.count == 0) {
    out.failure = "no client updates";
    return out;
  }
  const double inv = 1.0 / static_cast<double>(out.count);
  for (std::size_t i = 0; i < out.mean.size(); ++i) out.mean[i] *= inv;
  out.ok = true;
  return out;
}

nlohmann::json TelemetryRecord::to_json() const {
  nlohmann::json j;
  j["round_index"] = round_index;
  j["cohort_size"] = cohort_size;
  j["survivor_count"] = survivor_count;
  j["abort_flag"] = abort_flag;
  j["status"] = status;
  j["wall_time_ms"] = wall_time_ms;
  if (metrics) {
    j["metrics"] = {{"prediction_accuracy", metrics->prediction_accuracy},
                    {"picked_ratio_proxy", metrics->picked_ratio_proxy},
                    {"mean_log_loss", metrics->mean_log_loss},
                    {"n_eval", metrics->n_eval}};
  } else {
    j["metrics"] = nullptr;
  }
  return j;
}

RoundOutcome run_round(Population& pop, const RoundPlan& plan, const ModelShape& shape,
                       const ClientConfig& client_config, AggregationBackend& backend,
                       ServerOptimizer& optimizer, const RoundSeeds& seeds) {
  plan.validate();
  for (auto c : plan.cohort)
    if (c >= pop.size()) throw Error(ErrorCode::kInvalidArgument, "cohort index out of range");
  const auto started = std::chrono::steady_clock::now();
  RoundOutcome outcome;
  auto& tel = outcome.telemetry;
  tel.round_index = plan.round_index;
  tel.cohort_size = plan.cohort.size();
  auto finish = [&](std::string status) {
    tel.status = std::move(status);
    tel.abort_flag = outcome.aborted();
    tel.survivor_count = outcome.survivors;
    tel.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    return outcome;
  };

  const auto online = simulate_dropouts(plan, seeds.dropout);
  const std::set<std::size_t> online_set(online.begin(), online.end());

  // Broadcast, local training and clipping. A client without data drops.
  std::vector<std::optional<SealedUpdate>> cohort;
  std::vector<std::size_t> survivors;
  const ParameterVector checkpoint = optimizer.checkpoint();
  for (auto c : plan.cohort) {
    if (!online_set.count(c)) {
      cohort.emplace_back(std::nullopt);
      continue;
    }
    try {
      cohort.emplace_back(run_client(shape, checkpoint, pop.client(c), client_config,
                                     child_seed(seeds.training, "client", c), plan.round_index));
      survivors.push_back(c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyDataset) throw;
      cohort.emplace_back(std::nullopt);
    }
  }
  outcome.survivors = survivors.size();
  if (enforce_min_aggregation(survivors.size(), plan.min_aggregation) == Decision::kAbort)
    return finish("ABORTED");

  const auto aggregate = backend.aggregate(std::move(cohort), plan.round_index, seeds.aggregation);
  if (!aggregate.ok) return finish("SECAGG_FAILED");

  optimizer.apply(aggregate);
  pop.record_participation(survivors, plan.round_index);
  outcome.new_checkpoint = optimizer.checkpoint();
  return finish("OK");
}

}  // namespace fedshield::federation

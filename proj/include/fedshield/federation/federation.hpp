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

// Round orchestration: sample a cohort under the participation policy,
// simulate dropouts, train clients, aggregate behind a backend boundary and
// apply the server optimizer.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedshield/model/model.hpp"
#include <nlohmann/json.hpp>

namespace fedshield::federation {

using model::LocalDataset;
using model::ModelShape;
using model::ParameterVector;

class Population;
struct RoundPlan;
struct ClientConfig;
class AggregationBackend;
class ServerOptimizer;
struct RoundSeeds;
struct RoundOutcome;

RoundOutcome run_round(Population& pop, const RoundPlan& plan, const ModelShape& shape,
                       const ClientConfig& client_config, AggregationBackend& backend,
                       ServerOptimizer& optimizer, const RoundSeeds& seeds);

// A participation event, kept simulation-side for audits. Never emitted.
struct ParticipationRecord {
  std::int64_t round_index;
  std::size_t client;
};

class Population {
 public:
  explicit Population(std::vector<LocalDataset> clients);

  std::size_t size() const { return clients_.size(); }
  const LocalDataset& client(std::size_t index) const { return clients_.at(index); }
  std::optional<std::int64_t> last_participation(std::size_t index) const {
    return last_participation_.at(index);
  }
  // Eligible iff never participated or last participation <= round - min_separation.
  bool eligible(std::size_t index, std::int64_t round, std::size_t min_separation) const;
  const std::vector<ParticipationRecord>& audit_log() const { return audit_; }

 private:
  friend RoundOutcome run_round(Population&, const RoundPlan&, const ModelShape&,
                                const ClientConfig&, AggregationBackend&, ServerOptimizer&,
                                const RoundSeeds&);
  void record_participation(const std::vector<std::size_t>& clients, std::int64_t round);

  std::vector<LocalDataset> clients_;
  std::vector<std::optional<std::int64_t>> last_participation_;
  std::vector<ParticipationRecord> audit_;
};

struct RoundPlan {
  std::int64_t round_index = 1;
  std::vector<std::size_t> cohort;  // population indices, ascending
  std::size_t report_goal = 1;
  std::size_t min_aggregation = 1;
  double dropout_rate = 0.0;

  void validate() const;
};

// Uniform subset without replacement of the eligible clients. Throws
// POPULATION_EXHAUSTED when fewer than report_goal are eligible.
RoundPlan sample_cohort(const Population& pop, std::int64_t round, std::size_t report_goal,
                        std::size_t min_separation, std::uint64_t seed,
                        std::size_t min_aggregation = 1, double dropout_rate = 0.0);

// Each cohort member independently survives with probability 1 - dropout_rate.
std::vector<std::size_t> simulate_dropouts(const RoundPlan& plan, std::uint64_t seed);

enum class Decision { kProceed, kAbort };

// Inclusive: survivor_count == min_aggregation proceeds.
Decision enforce_min_aggregation(std::size_t survivor_count, std::size_t min_aggregation);

struct ClientConfig {
  int epochs = 1;
  double learning_rate = 0.1;
  double clip_norm = 1.0;
};

// Opaque client update. Only aggregation backends can read it.
class SealedUpdate {
 public:
  SealedUpdate(SealedUpdate&&) = default;
  SealedUpdate& operator=(SealedUpdate&&) = default;
  SealedUpdate(const SealedUpdate&) = delete;
  SealedUpdate& operator=(const SealedUpdate&) = delete;

  std::size_t dimension() const { return update_.delta.size(); }

 private:
  friend class AggregationBackend;
  friend SealedUpdate run_client(const ModelShape&, const ParameterVector&, const LocalDataset&,
                                 const ClientConfig&, std::uint64_t, std::int64_t);
  explicit SealedUpdate(model::ClientUpdate update) : update_(std::move(update)) {}

  model::ClientUpdate update_;
};

// On-device pipeline: local_train then clip_update, sealed.
SealedUpdate run_client(const ModelShape& shape, const ParameterVector& checkpoint,
                        const LocalDataset& data, const ClientConfig& config,
                        std::uint64_t seed, std::int64_t round_index);

struct Aggregate {
  bool ok = false;
  ParameterVector mean;  // mean over contributing clients
  std::size_t count = 0;
  std::string failure;
};

class AggregationBackend {
 public:
  virtual ~AggregationBackend() = default;
  virtual std::string name() const = 0;
  // `cohort` is in cohort order; nullopt marks a client that dropped after
  // joining the round.
  virtual Aggregate aggregate(std::vector<std::optional<SealedUpdate>> cohort,
                              std::int64_t round_index, std::uint64_t seed) = 0;

 protected:
  static const model::ClientUpdate& open(const SealedUpdate& update) { return update.update_; }
};

// Index-ascending mean of the clipped deltas.
class PlainMeanBackend : public AggregationBackend {
 public:
  std::string name() const override { return "PLAIN_MEAN"; }
  Aggregate aggregate(std::vector<std::optional<SealedUpdate>> cohort,
                      std::int64_t round_index, std::uint64_t seed) override;
};

struct SecureBackendConfig {
  unsigned field_bits = 32;
  std::size_t degree = 0;     // 0: min(n - 1, 50)
  std::size_t threshold = 0;  // 0: max(1, ceil(2k / 3))
  double clip_norm = 1.0;
  double scale = 1024.0;
  double mu = 0.0;            // Skellam noise per client; 0 disables DDP noise
  std::string transcript_path;  // optional JSONL dump
};

// Quantizes each clipped update, optionally adds Skellam noise, runs a
// SecAgg session over the cohort (dropped clients vanish before the
// masked-input phase) and dequantizes the sum.
class SecureBackend : public AggregationBackend {
 public:
  explicit SecureBackend(SecureBackendConfig config) : config_(std::move(config)) {}
  std::string name() const override { return config_.mu > 0 ? "SECAGG_DDP" : "SECAGG"; }
  Aggregate aggregate(std::vector<std::optional<SealedUpdate>> cohort,
                      std::int64_t round_index, std::uint64_t seed) override;

  static std::size_t resolved_degree(std::size_t n, std::size_t degree);
  static std::size_t resolved_threshold(std::size_t k, std::size_t threshold);

 private:
  SecureBackendConfig config_;
};

class ServerOptimizer {
 public:
  virtual ~ServerOptimizer() = default;
  virtual const ParameterVector& checkpoint() const = 0;
  virtual void apply(const Aggregate& aggregate) = 0;
};

struct TelemetryRecord {
  std::int64_t round_index = 0;
  std::size_t cohort_size = 0;
  std::size_t survivor_count = 0;
  bool abort_flag = false;
  std::string status;  // OK, ABORTED, SECAGG_FAILED, POPULATION_EXHAUSTED
  std::int64_t wall_time_ms = 0;
  std::optional<model::MetricsReport> metrics;

  nlohmann::json to_json() const;
};

struct RoundOutcome {
  std::optional<ParameterVector> new_checkpoint;  // nullopt = ABORTED
  std::size_t survivors = 0;
  TelemetryRecord telemetry;

  bool aborted() const { return !new_checkpoint.has_value(); }
};

struct RoundSeeds {
  std::uint64_t dropout = 0;
  std::uint64_t training = 0;
  std::uint64_t aggregation = 0;
};

// Runs one round. Participation is recorded for survivors only, and only
// when the round completes; aborted rounds leave the population and the
// optimizer untouched.
RoundOutcome run_round(Population& pop, const RoundPlan& plan, const ModelShape& shape,
                       const ClientConfig& client_config, AggregationBackend& backend,
                       ServerOptimizer& optimizer, const RoundSeeds& seeds);

}  // namespace fedshield::federation

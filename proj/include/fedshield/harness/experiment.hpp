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

// Experiment pipelines: corpus ingestion, training runs, dry-run
// accounting and paired comparisons.
//
// Output directory layout written by run_experiment:
//   effective_config.txt  every configuration key with its effective value
//   metrics.csv           round,survivors,aborted,prediction_accuracy,
//                         picked_ratio_proxy,mean_log_loss
//   telemetry.jsonl       one record per round
//   ledger.json           final privacy ledger
//   checkpoint.bin        final model, present only when the ledger passes
//
// Utility metrics are heldout proxies, not live-traffic ratios.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedshield/dpftrl/accountant.hpp"
#include "fedshield/federation/federation.hpp"
#include "fedshield/harness/config.hpp"
#include "fedshield/model/model.hpp"

namespace fedshield::harness {

// Corpus split by line order: the first 80% of lines go to the federated
// users in contiguous equal blocks (the remainder spread over the first
// users), the next 10% form the public pretraining split and the final 10%
// the heldout evaluation split. The vocabulary is built from the public
// split only.
struct CorpusSplit {
  explicit CorpusSplit(model::Vocabulary v) : vocab(std::move(v)) {}

  model::Vocabulary vocab;
  std::vector<model::LocalDataset> users;
  model::LocalDataset public_data;
  model::LocalDataset heldout;
};

std::vector<std::string> read_corpus_lines(const std::filesystem::path& path);
CorpusSplit split_corpus(const std::vector<std::string>& lines, std::size_t users,
                         std::size_t vocab_size);

// Accuracy of always predicting the single most frequent heldout target.
double majority_baseline_accuracy(const CorpusSplit& split);

struct MetricsRow {
  std::int64_t round = 0;
  std::size_t survivors = 0;
  bool aborted = false;
  model::MetricsReport metrics;
};

struct ExperimentResult {
  std::vector<MetricsRow> metrics;
  dpftrl::PrivacyLedger ledger;
  std::optional<std::filesystem::path> checkpoint;  // nullopt: WITHHELD
  std::filesystem::path metrics_path;
  std::filesystem::path telemetry_path;
  std::filesystem::path ledger_path;
  model::ParameterVector final_params;
  std::size_t completed_rounds = 0;
  // Simulation-side audit data. Never written to the output directory.
  std::vector<federation::ParticipationRecord> audit_log;
  std::vector<std::string> user_ids;
};

dpftrl::LedgerInputs ledger_inputs(const ExperimentConfig& cfg);

// Dry run: the ledger run_experiment would produce, without touching data.
dpftrl::PrivacyLedger account(const ExperimentConfig& cfg);

// Initial parameters: seeded init followed by optional public pretraining.
model::ParameterVector initial_checkpoint(const ExperimentConfig& cfg, const CorpusSplit& split);

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<model::ParameterVector>& initial = std::nullopt);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct ComparisonRow {
  std::int64_t round = 0;
  double accuracy_delta = 0.0;  // b - a
  double picked_ratio_delta = 0.0;
  double log_loss_delta = 0.0;
};

struct ComparisonReport {
  std::string mode_a;
  std::string mode_b;
  std::vector<ComparisonRow> rows;
  dpftrl::PrivacyLedger ledger_a;
  dpftrl::PrivacyLedger ledger_b;
  double tolerance = 0.0;
  double final_accuracy_delta = 0.0;
  bool within_tolerance = false;

  std::string verdict() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

// Paired runs. Both configs must agree on seed, corpus, population, model
// and round count. Each run writes into out_dir/a and out_dir/b.
ComparisonReport compare(const ExperimentConfig& a, const ExperimentConfig& b,
                         const std::filesystem::path& out_dir);

}  // namespace fedshield::harness

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

// fedshield command line tool.
//
//   fedshield pretrain --config PATH [--seed N] [--out DIR]
//   fedshield train    --config PATH [--seed N] [--out DIR] [--init PATH]
//   fedshield evaluate --config PATH --checkpoint PATH
//   fedshield account  --config PATH [--out DIR]
//   fedshield compare  --config PATH --against PATH [--seed N] [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 budget FAIL, 1 other.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/harness/config.hpp"
#include "fedshield/harness/experiment.hpp"
#include "fedshield/model/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace fedshield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "experiment config file")->required();
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--out", flags.out, "output directory override");
}

harness::ExperimentConfig load(const CommonFlags& flags) {
  auto cfg = harness::load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.output_dir = *flags.out;
  cfg.validate();
  return cfg;
}

void print_metrics(const model::MetricsReport& m) {
  nlohmann::json j{{"prediction_accuracy", m.prediction_accuracy},
                   {"picked_ratio_proxy", m.picked_ratio_proxy},
                   {"mean_log_loss", m.mean_log_loss},
                   {"n_eval", m.n_eval}};
  std::cout << j.dump(2) << "\n";
}

int cmd_pretrain(const CommonFlags& flags) {
  auto cfg = load(flags);
  fs::create_directories(cfg.output_dir);
  const auto split = harness::split_corpus(harness::read_corpus_lines(cfg.corpus_path), cfg.users,
                                           cfg.vocab_size);
  const auto params = harness::initial_checkpoint(cfg, split);
  const auto path = fs::path(cfg.output_dir) / "pretrained.bin";
  model::write_checkpoint(path, params);
  const auto shape = model::ModelShape::make(split.vocab.size(), cfg.embed_dim);
  print_metrics(model::evaluate(shape, params, std::span(&split.heldout, 1), cfg.top_k));
  std::cout << "checkpoint: " << path.string() << "\n";
  return kExitOk;
}

int cmd_train(const CommonFlags& flags, const std::string& init) {
  auto cfg = load(flags);
  std::optional<model::ParameterVector> initial;
  if (!init.empty()) initial = model::read_checkpoint(init);
  const auto result = harness::run_experiment(cfg, initial);
  std::cout << "rounds completed: " << result.completed_rounds << "/" << cfg.rounds << "\n";
  if (!result.metrics.empty()) {
    const auto& m = result.metrics.back().metrics;
    std::cout << "final prediction_accuracy: " << m.prediction_accuracy << "\n";
  }
  std::cout << "ledger: " << result.ledger_path.string() << "\n";
  std::cout << "verdict: " << dpftrl::verdict_name(result.ledger.verdict) << "\n";
  if (!result.checkpoint) {
    std::cout << "checkpoint: WITHHELD\n";
    return kExitBudget;
  }
  std::cout << "checkpoint: " << result.checkpoint->string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint) {
  auto cfg = load(flags);
  const auto split = harness::split_corpus(harness::read_corpus_lines(cfg.corpus_path), cfg.users,
                                           cfg.vocab_size);
  const auto shape = model::ModelShape::make(split.vocab.size(), cfg.embed_dim);
  const auto params = model::read_checkpoint(checkpoint);
  if (params.size() != shape.parameter_count())
    throw Error(ErrorCode::kConfig, "checkpoint dimension " + std::to_string(params.size()) +
                                        " does not match model dimension " +
                                        std::to_string(shape.parameter_count()));
  print_metrics(model::evaluate(shape, params, std::span(&split.heldout, 1), cfg.top_k));
  return kExitOk;
}

int cmd_account(const CommonFlags& flags) {
  auto cfg = load(flags);
  const auto ledger = harness::account(cfg);
  const auto text = dpftrl::ledger_to_json(ledger).dump(2) + "\n";
  std::cout << text;
  if (flags.out) {
    fs::create_directories(*flags.out);
    std::ofstream(fs::path(*flags.out) / "ledger.json", std::ios::binary) << text;
  }
  return ledger.verdict == dpftrl::Verdict::kPass ? kExitOk : kExitBudget;
}

int cmd_compare(const CommonFlags& flags, const std::string& against) {
  auto a = load(flags);
  CommonFlags fb = flags;
  fb.config = against;
  auto b = load(fb);
  const auto report = harness::compare(a, b, a.output_dir);
  std::cout << report.to_text();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedshield: private federated next-word prediction simulator"};
  app.require_subcommand(1);

  CommonFlags pretrain_flags, train_flags, eval_flags, account_flags, compare_flags;
  std::string init_path, checkpoint_path, against_path;

  auto* pretrain = app.add_subcommand("pretrain", "initialize and pretrain on the public split");
  add_common(pretrain, pretrain_flags);
  auto* train = app.add_subcommand("train", "run the federated training pipeline");
  add_common(train, train_flags);
  train->add_option("--init", init_path, "initial checkpoint (e.g. from pretrain)");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the heldout split");
  add_common(evaluate, eval_flags);
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  auto* acct = app.add_subcommand("account", "dry-run privacy accounting");
  add_common(acct, account_flags);
  auto* cmp = app.add_subcommand("compare", "paired comparison of two configs");
  add_common(cmp, compare_flags);
  cmp->add_option("--against", against_path, "second config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*pretrain) return cmd_pretrain(pretrain_flags);
    if (*train) return cmd_train(train_flags, init_path);
    if (*evaluate) return cmd_evaluate(eval_flags, checkpoint_path);
    if (*acct) return cmd_account(account_flags);
    if (*cmp) return cmd_compare(compare_flags, against_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kHeadroom) return kExitConfig;
    return kExitOther;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}

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

#include "fedshield/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "fedshield/ddp/ddp.hpp"
#include "fedshield/dpftrl/noise_tree.hpp"
#include "fedshield/dpftrl/server_optimizer.hpp"
#include "fedshield/error.hpp"
#include "fedshield/model/checkpoint.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::harness {
namespace fs = std::filesystem;
using model::LocalDataset;
using model::ParameterVector;

namespace {

std::string opaque_user_id(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "u%016llx",
                static_cast<unsigned long long>(child_seed(0x5eed, "harness/user", index)));
  return buf;
}

LocalDataset encode_lines(const model::Vocabulary& vocab,
                          const std::vector<std::vector<std::string>>& tokens,
                          std::size_t begin, std::size_t end, std::string user_id) {
  LocalDataset ds;
  ds.user_id = std::move(user_id);
  for (std::size_t i = begin; i < end; ++i) {
    if (tokens[i].empty()) continue;
    ds.sequences.push_back(vocab.encode(tokens[i]));
  }
  return ds;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

// Prefix-sum server optimizer over a per-segment noise tree. Non-DP modes
// run the same update with zero noise, which is plain FedAvg with a server
// learning rate.
class TreeServerOptimizer final : public federation::ServerOptimizer {
 public:
  TreeServerOptimizer(ParameterVector initial, const ExperimentConfig& cfg)
      : cfg_(cfg),
        state_(std::move(initial), cfg.server_lr, cfg.server_momentum, cfg.report_goal),
        segment_length_(cfg.restart_every > 0 ? std::min(cfg.restart_every, cfg.rounds)
                                              : cfg.rounds) {
    if (segment_length_ == 0) segment_length_ = 1;
    tree_ = make_tree(0);
  }

  const ParameterVector& checkpoint() const override { return state_.checkpoint(); }

  void apply(const federation::Aggregate& aggregate) override {
    if (state_.steps() == segment_length_) {
      state_.restart();
      tree_ = make_tree(++segment_);
    }
    ParameterVector step = aggregate.mean;
    if (mode_uses_dp(cfg_.mode)) {
      // Fixed denominator: sum / report_goal, so the sensitivity does not
      // depend on the survivor count.
      const double f = static_cast<double>(aggregate.count) / static_cast<double>(cfg_.report_goal);
      for (std::size_t i = 0; i < step.size(); ++i) step[i] *= f;
    }
    state_ = server_step(state_, step, *tree_, state_.steps() + 1);
  }

 private:
  std::unique_ptr<dpftrl::NoiseTree> make_tree(std::uint64_t segment) const {
    return std::make_unique<dpftrl::NoiseTree>(
        segment_length_, state_.anchor().size(), cfg_.noise_multiplier * cfg_.clip_norm,
        child_seed(cfg_.seed, "harness/tree", segment));
  }

  const ExperimentConfig& cfg_;
  dpftrl::ServerOptimizerState state_;
  std::size_t segment_length_;
  std::uint64_t segment_ = 0;
  std::unique_ptr<dpftrl::NoiseTree> tree_;
};

std::unique_ptr<federation::AggregationBackend> make_backend(const ExperimentConfig& cfg) {
  if (!mode_uses_secagg(cfg.mode)) return std::make_unique<federation::PlainMeanBackend>();
  federation::SecureBackendConfig sc;
  sc.field_bits = cfg.secagg_bits;
  sc.degree = cfg.secagg_degree;
  sc.threshold = cfg.secagg_threshold;
  sc.clip_norm = cfg.clip_norm;
  sc.scale = cfg.ddp_scale;
  sc.mu = cfg.ddp_mu;
  if (!cfg.secagg_transcript.empty()) {
    fs::path p(cfg.secagg_transcript);
    sc.transcript_path = (p.is_absolute() ? p : fs::path(cfg.output_dir) / p).string();
  }
  return std::make_unique<federation::SecureBackend>(sc);
}

}  // namespace

std::vector<std::string> read_corpus_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read corpus " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

CorpusSplit split_corpus(const std::vector<std::string>& lines, std::size_t users,
                         std::size_t vocab_size) {
  if (users == 0) throw Error(ErrorCode::kInvalidArgument, "users must be >= 1");
  const std::size_t n = lines.size();
  const std::size_t train_end = n * 8 / 10;
  const std::size_t public_end = n * 9 / 10;
  if (train_end < users || public_end == train_end || n == public_end)
    throw Error(ErrorCode::kEmptyDataset, "corpus too small for the requested split");

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(n);
  for (const auto& l : lines) tokens.push_back(model::tokenize(l));

  std::vector<std::vector<std::string>> public_tokens(tokens.begin() + train_end,
                                                      tokens.begin() + public_end);
  CorpusSplit split(model::Vocabulary::build(public_tokens, vocab_size));

  const std::size_t base = train_end / users;
  const std::size_t extra = train_end % users;
  std::size_t pos = 0;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t len = base + (u < extra ? 1 : 0);
    split.users.push_back(encode_lines(split.vocab, tokens, pos, pos + len, opaque_user_id(u)));
    pos += len;
  }
  split.public_data = encode_lines(split.vocab, tokens, train_end, public_end, "public");
  split.heldout = encode_lines(split.vocab, tokens, public_end, n, "heldout");
  return split;
}

double majority_baseline_accuracy(const CorpusSplit& split) {
  std::map<model::TokenId, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& ex : model::examples_of(split.heldout)) {
    ++counts[ex.target];
    ++total;
  }
  if (total == 0) throw Error(ErrorCode::kEmptyDataset, "heldout split has no examples");
  std::size_t best = 0;
  for (const auto& [tok, c] : counts) best = std::max(best, c);
  return static_cast<double>(best) / static_cast<double>(total);
}

dpftrl::LedgerInputs ledger_inputs(const ExperimentConfig& cfg) {
  dpftrl::LedgerInputs in;
  in.clip_norm = cfg.clip_norm;
  in.noise_multiplier = mode_uses_dp(cfg.mode) ? cfg.noise_multiplier : 0.0;
  in.rounds = cfg.rounds;
  in.min_separation = cfg.min_separation;
  in.restart_every = cfg.restart_every;
  if (cfg.mode == Mode::kDpSecAggDdp) {
    ddp::DdpConfig d;
    d.clip_norm = cfg.clip_norm;
    d.scale = cfg.ddp_scale;
    d.field = secagg::FieldSpec::make(cfg.secagg_bits);
    d.mu = cfg.ddp_mu;
    d.clients = cfg.report_goal;
    in.ddp_rho_per_round = ddp::ddp_zcdp_contribution(d, cfg.min_aggregation);
  }
  in.deltas = cfg.deltas;
  in.budget = cfg.budget;
  return in;
}

dpftrl::PrivacyLedger account(const ExperimentConfig& cfg) {
  cfg.validate();
  return dpftrl::build_ledger(ledger_inputs(cfg));
}

ParameterVector initial_checkpoint(const ExperimentConfig& cfg, const CorpusSplit& split) {
  const auto shape = model::ModelShape::make(split.vocab.size(), cfg.embed_dim);
  auto params = model::init_model(shape, child_seed(cfg.seed, "harness/init", 0));
  if (cfg.pretrain_steps > 0)
    params = model::pretrain(shape, params, split.public_data, cfg.pretrain_steps, cfg.pretrain_lr,
                             child_seed(cfg.seed, "harness/pretrain", 0));
  return params;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "round,survivors,aborted,prediction_accuracy,picked_ratio_proxy,mean_log_loss\n";
  for (const auto& r : rows) {
    out += std::to_string(r.round) + "," + std::to_string(r.survivors) + "," +
           (r.aborted ? "1" : "0") + "," + fmt(r.metrics.prediction_accuracy) + "," +
           fmt(r.metrics.picked_ratio_proxy) + "," + fmt(r.metrics.mean_log_loss) + "\n";
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<ParameterVector>& initial) {
  cfg.validate();
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "effective_config.txt", cfg.effective_text());

  const auto split = split_corpus(read_corpus_lines(cfg.corpus_path), cfg.users, cfg.vocab_size);
  const auto shape = model::ModelShape::make(split.vocab.size(), cfg.embed_dim);
  ParameterVector start = initial ? *initial : initial_checkpoint(cfg, split);
  if (start.size() != shape.parameter_count())
    throw Error(ErrorCode::kInvalidArgument, "initial checkpoint has dimension " +
                                                 std::to_string(start.size()) + ", model needs " +
                                                 std::to_string(shape.parameter_count()));

  ExperimentResult result;
  for (const auto& u : split.users) result.user_ids.push_back(u.user_id);
  federation::Population pop(split.users);
  TreeServerOptimizer optimizer(std::move(start), cfg);
  auto backend = make_backend(cfg);
  if (!cfg.secagg_transcript.empty()) {
    fs::path p(cfg.secagg_transcript);
    std::ofstream(p.is_absolute() ? p : out_dir / p, std::ios::trunc);
  }

  federation::ClientConfig client;
  client.epochs = cfg.local_epochs;
  client.learning_rate = cfg.client_lr;
  client.clip_norm = cfg.clip_norm;

  auto ledger = dpftrl::build_ledger(ledger_inputs(cfg));
  std::string telemetry;
  const std::span<const LocalDataset> heldout(&split.heldout, 1);

  for (std::size_t r = 1; r <= cfg.rounds; ++r) {
    const auto round = static_cast<std::int64_t>(r);
    federation::TelemetryRecord tel;
    MetricsRow row;
    row.round = round;
    try {
      const auto plan = federation::sample_cohort(pop, round, cfg.report_goal, cfg.min_separation,
                                                  child_seed(cfg.seed, "round/sample", r),
                                                  cfg.min_aggregation, cfg.dropout_rate);
      federation::RoundSeeds seeds{child_seed(cfg.seed, "round/dropout", r),
                                   child_seed(cfg.seed, "round/train", r),
                                   child_seed(cfg.seed, "round/aggregate", r)};
      auto outcome = federation::run_round(pop, plan, shape, client, *backend, optimizer, seeds);
      tel = outcome.telemetry;
      row.survivors = outcome.survivors;
      row.aborted = outcome.aborted();
      if (!row.aborted) {
        ++result.completed_rounds;
        ledger.record_round();
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPopulationExhausted) throw;
      tel.round_index = round;
      tel.cohort_size = 0;
      tel.abort_flag = true;
      tel.status = "POPULATION_EXHAUSTED";
      row.aborted = true;
    }
    row.metrics = model::evaluate(shape, optimizer.checkpoint(), heldout, cfg.top_k);
    tel.metrics = row.metrics;
    if (!cfg.record_wall_time) tel.wall_time_ms = 0;
    telemetry += tel.to_json().dump() + "\n";
    result.metrics.push_back(row);
  }

  result.final_params = optimizer.checkpoint();
  result.metrics_path = out_dir / "metrics.csv";
  result.telemetry_path = out_dir / "telemetry.jsonl";
  result.ledger_path = out_dir / "ledger.json";
  write_text(result.metrics_path, metrics_csv(result.metrics));
  write_text(result.telemetry_path, telemetry);
  write_text(result.ledger_path, dpftrl::ledger_to_json(ledger).dump(2) + "\n");

  const fs::path ckpt = out_dir / "checkpoint.bin";
  if (ledger.verdict == dpftrl::Verdict::kPass) {
    model::write_checkpoint(ckpt, result.final_params);
    result.checkpoint = ckpt;
  } else {
    fs::remove(ckpt);  // never leave a stale release behind a FAIL
  }
  result.ledger = ledger;
  result.audit_log = pop.audit_log();
  return result;
}

std::string ComparisonReport::verdict() const {
  return std::string("utility delta within ") + fmt(tolerance) + ": " +
         (within_tolerance ? "yes" : "no");
}

std::string ComparisonReport::to_text() const {
  std::ostringstream o;
  o << "a: " << mode_a << "\nb: " << mode_b << "\n";
  o << "round,accuracy_delta,picked_ratio_delta,log_loss_delta\n";
  for (const auto& r : rows)
    o << r.round << "," << fmt(r.accuracy_delta) << "," << fmt(r.picked_ratio_delta) << ","
      << fmt(r.log_loss_delta) << "\n";
  auto rho = [](double v) { return std::isfinite(v) ? fmt(v) : std::string("unbounded"); };
  o << "a rho_central: " << rho(ledger_a.rho_central) << "\n";
  if (ledger_a.ddp_configured) o << "a rho_ddp: " << rho(ledger_a.rho_ddp) << "\n";
  o << "a total_rho: " << rho(ledger_a.total_rho) << "\n";
  o << "b rho_central: " << rho(ledger_b.rho_central) << "\n";
  if (ledger_b.ddp_configured) o << "b rho_ddp: " << rho(ledger_b.rho_ddp) << "\n";
  o << "b total_rho: " << rho(ledger_b.total_rho) << "\n";
  o << "final accuracy delta: " << fmt(final_accuracy_delta) << "\n";
  o << verdict() << "\n";
  return o.str();
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json j;
  j["mode_a"] = mode_a;
  j["mode_b"] = mode_b;
  j["rounds"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rounds"].push_back({{"round", r.round},
                           {"accuracy_delta", r.accuracy_delta},
                           {"picked_ratio_delta", r.picked_ratio_delta},
                           {"log_loss_delta", r.log_loss_delta}});
  j["ledger_a"] = dpftrl::ledger_to_json(ledger_a);
  j["ledger_b"] = dpftrl::ledger_to_json(ledger_b);
  j["tolerance"] = tolerance;
  j["final_accuracy_delta"] = final_accuracy_delta;
  j["verdict"] = verdict();
  return j;
}

ComparisonReport compare(const ExperimentConfig& a, const ExperimentConfig& b,
                         const fs::path& out_dir) {
  const auto ma = a.to_map();
  const auto mb = b.to_map();
  for (const char* key : {"seed", "data.corpus", "data.users", "model.vocab_size",
                          "model.embed_dim", "train.rounds", "train.pretrain_steps"}) {
    if (ma.at(key) != mb.at(key))
      throw Error(ErrorCode::kConfig, std::string("comparison basis mismatch on ") + key + ": '" +
                                          ma.at(key) + "' vs '" + mb.at(key) + "'");
  }
  ExperimentConfig ca = a;
  ExperimentConfig cb = b;
  ca.output_dir = (out_dir / "a").string();
  cb.output_dir = (out_dir / "b").string();
  const auto ra = run_experiment(ca);
  const auto rb = run_experiment(cb);

  ComparisonReport rep;
  rep.mode_a = mode_name(a.mode);
  rep.mode_b = mode_name(b.mode);
  rep.ledger_a = ra.ledger;
  rep.ledger_b = rb.ledger;
  rep.tolerance = a.compare_tolerance;
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    const auto& x = ra.metrics[i].metrics;
    const auto& y = rb.metrics[i].metrics;
    rep.rows.push_back(ComparisonRow{ra.metrics[i].round,
                                     y.prediction_accuracy - x.prediction_accuracy,
                                     y.picked_ratio_proxy - x.picked_ratio_proxy,
                                     y.mean_log_loss - x.mean_log_loss});
  }
  rep.final_accuracy_delta = rep.rows.empty() ? 0.0 : rep.rows.back().accuracy_delta;
  rep.within_tolerance = std::abs(rep.final_accuracy_delta) <= rep.tolerance;
  fs::create_directories(out_dir);
  write_text(out_dir / "comparison.json", rep.to_json().dump(2) + "\n");
  return rep;
}

}  // namespace fedshield::harness

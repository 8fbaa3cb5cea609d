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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are fixed here, not tuned per
// run.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fedshield/ddp/ddp.hpp"
#include "fedshield/dpftrl/accountant.hpp"
#include "fedshield/dpftrl/noise_tree.hpp"
#include "fedshield/error.hpp"
#include "fedshield/harness/config.hpp"
#include "fedshield/harness/experiment.hpp"
#include "fedshield/secagg/keys.hpp"
#include "fedshield/secagg/masking.hpp"
#include "fedshield/secagg/session.hpp"
#include "fedshield/secagg/shamir.hpp"
#include "fedshield/secagg/topology.hpp"
#include "fedshield/seeds.hpp"
#include "stats.hpp"

namespace fs = std::filesystem;
using namespace fedshield;
using secagg::ClientId;
using secagg::FieldSpec;
using secagg::QuantizedVector;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path workdir(const std::string& name) {
  const auto p = fs::temp_directory_path() / "fedshield_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// The bundled-corpus experiment used by several criteria.
std::string corpus_config(const std::string& extra, int min_separation = 4) {
  return std::string("data.corpus = ") + FEDSHIELD_CORPUS +
         "\nseed = 2026\n"
         "data.users = 100\n"
         "model.vocab_size = 50\n"
         "model.embed_dim = 16\n"
         "federation.report_goal = 20\n"
         "federation.min_aggregation = 10\n"
         "federation.min_separation = " + std::to_string(min_separation) +
         "\n"
         "telemetry.record_wall_time = false\n" +
         extra;
}

QuantizedVector plaintext_sum(const std::vector<QuantizedVector>& inputs,
                              const std::vector<ClientId>& who, FieldSpec f, std::size_t d) {
  QuantizedVector s{f, std::vector<std::uint32_t>(d, 0)};
  for (auto i : who) s.add_assign(inputs[i]);
  return s;
}

// 1. Randomized protocol runs against the plaintext-sum oracle.
Verdict secagg_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  int exact = 0, complete_runs = 0, regular_runs = 0;
  std::string first_problem;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 49;  // 2..50
    const bool complete = n < 5 || rng() % 2 == 0;
    const std::size_t k = complete ? n - 1 : 2 + rng() % std::min<std::size_t>(n - 3, 12);
    const std::size_t t = 1 + rng() % (complete ? n : k);
    // Complete graphs tolerate any n - t dropouts. A k-regular graph loses
    // up to n - t clients globally but each neighborhood of k + 1 holders
    // must keep t of them, so its bound is min(n - t, k + 1 - t).
    const std::size_t max_drop = complete ? n - t : std::min(n - t, k + 1 - t);
    const std::size_t drops = rng() % (max_drop + 1);
    const unsigned bits = 1 + rng() % 32;
    const std::size_t d = 1 + rng() % 8;

    auto cfg = std::make_shared<secagg::SecAggConfig>();
    cfg->field = FieldSpec::make(bits);
    cfg->dimension = d;
    cfg->threshold = t;
    cfg->graph = complete ? secagg::CommGraph::complete(n) : secagg::build_topology(n, k, t, rng());
    (complete ? complete_runs : regular_runs)++;

    std::vector<QuantizedVector> inputs;
    for (std::size_t i = 0; i < n; ++i) {
      QuantizedVector v{cfg->field, std::vector<std::uint32_t>(d)};
      for (auto& x : v.values) x = static_cast<std::uint32_t>(rng()) & cfg->field.mask();
      inputs.push_back(v);
    }
    std::vector<ClientId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    secagg::DropoutSchedule schedule;
    for (std::size_t i = 0; i < drops; ++i) schedule[ids[i]] = static_cast<secagg::Phase>(rng() % 4);

    const auto r = secagg::run_secure_aggregation(cfg, inputs, schedule, rng(), trial);
    std::vector<ClientId> expected_survivors;
    for (ClientId i = 0; i < n; ++i) {
      auto it = schedule.find(i);
      if (it == schedule.end() || it->second == secagg::Phase::kUnmask) expected_survivors.push_back(i);
    }
    const bool ok = r.status == secagg::Phase::kDone && r.input_survivors == expected_survivors &&
                    *r.sum == plaintext_sum(inputs, expected_survivors, cfg->field, d);
    if (ok) {
      ++exact;
    } else if (first_problem.empty()) {
      first_problem = "; first mismatch at trial " + std::to_string(trial) + " (" + r.failure + ")";
    }
  }
  const double secs = seconds_since(t0);
  return {exact == 1000 && secs < 60.0,
          std::to_string(exact) + "/1000 exact (" + std::to_string(complete_runs) + " complete, " +
              std::to_string(regular_runs) + " k-regular) in " + fmt("%.1f", secs) + " s" + first_problem};
}

// 2. Masked-entry uniformity and single-share independence.
Verdict secagg_masking() {
  const auto field = FieldSpec::make(8);
  std::vector<std::size_t> counts(256, 0);
  const QuantizedVector input{field, {123}};
  const std::vector<ClientId> nbrs{1};
  for (std::uint64_t s = 0; s < 100000; ++s) {
    // Client 0 masks a fixed input with a fresh self-mask and one honest
    // neighbor, both derived through the real key schedule.
    const auto me = secagg::keygen(0, s), peer = secagg::keygen(1, s);
    const std::map<ClientId, secagg::PairwiseSecret> secrets{
        {1, secagg::derive_pairwise(me, peer.public_part())}};
    const auto self = secagg::self_mask_seed(secagg::self_mask_secret(0, s));
    ++counts[secagg::mask_update(0, input, self, secrets, nbrs).values[0]];
  }
  const double p = testing::chi_square_uniform_p(counts);

  // t = 2 over p = 257: for every holder and every secret, sweeping the
  // random coefficient yields each share value exactly once, so one share
  // is distributed identically whatever the secret.
  const secagg::PrimeField f(257);
  bool independent = true;
  for (std::uint32_t x = 1; x <= 5 && independent; ++x) {
    const std::vector<std::uint32_t> holder{x};
    for (std::uint64_t secret = 0; secret < 257 && independent; ++secret) {
      std::vector<int> seen(257, 0);
      for (std::uint64_t a = 0; a < 257; ++a) {
        const std::vector<std::uint64_t> coeffs{secret, a};
        ++seen[secagg::share_polynomial(coeffs, holder, f)[0].value];
      }
      independent = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    }
  }
  return {p > 0.001 && independent,
          "chi-square p = " + fmt("%.4f", p) + " over 10^5 masked entries; single-share independence " +
              (independent ? "holds" : "violated") + " exhaustively at p = 257"};
}

// 3. quantize -> noise -> secure sum -> dequantize is unbiased.
Verdict ddp_unbiasedness() {
  const std::size_t d = 8, n = 10;
  const int trials = 10000;
  ddp::DdpConfig cfg;
  cfg.clip_norm = 1.0;
  cfg.scale = 32;
  cfg.field = FieldSpec::make(20);
  cfg.mu = 4.0;
  cfg.clients = n;
  cfg.validate();

  std::mt19937_64 rng(303);
  std::normal_distribution<double> normal(0.0, 0.15);
  std::vector<model::ParameterVector> updates;
  std::vector<double> truth(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) x = normal(rng);
    auto u = model::clip_update(model::ParameterVector(v), cfg.clip_norm);
    for (std::size_t j = 0; j < d; ++j) truth[j] += u[j] / n;
    updates.push_back(u);
  }
  auto sa = std::make_shared<secagg::SecAggConfig>();
  sa->field = cfg.field;
  sa->dimension = d;
  sa->threshold = 6;
  sa->graph = secagg::CommGraph::complete(n);

  std::vector<double> sum(d, 0.0), sum2(d, 0.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<QuantizedVector> wire;
    for (std::size_t i = 0; i < n; ++i) {
      const auto base = child_seed(303, "trial", static_cast<std::uint64_t>(t) * n + i);
      wire.push_back(ddp::add_discrete_noise(ddp::quantize(updates[i], cfg, base), cfg.mu, base + 1));
    }
    const auto r = secagg::run_secure_aggregation(sa, wire, {}, child_seed(303, "session", t));
    if (!r.sum) return {false, "secure sum failed at trial " + std::to_string(t)};
    const auto est = ddp::dequantize_sum(*r.sum, n, cfg);
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += est[j];
      sum2[j] += est[j] * est[j];
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = sum[j] / trials;
    const double var = sum2[j] / trials - mean * mean;
    const double se = std::sqrt(var / trials);
    worst = std::max(worst, std::abs(mean - truth[j]) / se);
  }
  return {worst <= 3.0, "max |mean - truth| = " + fmt("%.2f", worst) + " standard errors (limit 3)"};
}

// 4. Cumulative tree noise variance is sigma^2 popcount(t).
Verdict tree_noise_law() {
  const double sigma = 1.0;
  const int trials = 100000;
  std::vector<double> m(9, 0), m2(9, 0);
  for (int s = 0; s < trials; ++s) {
    const dpftrl::NoiseTree tree(8, 1, sigma, child_seed(404, "tree", s));
    for (std::size_t t = 1; t <= 8; ++t) {
      const double x = tree.cumulative_noise(t)[0];
      m[t] += x;
      m2[t] += x * x;
    }
  }
  double worst = 0.0;
  for (std::size_t t = 1; t <= 8; ++t) {
    const double mean = m[t] / trials;
    const double var = m2[t] / trials - mean * mean;
    const double expected = sigma * sigma * std::popcount(t);
    worst = std::max(worst, std::abs(var / expected - 1.0));
  }
  return {worst <= 0.05, "max relative variance error " + fmt("%.4f", worst) + " over t = 1..8 (limit 0.05)"};
}

// 5. Accountant against brute-force composition and the closed form.
Verdict accountant_oracle() {
  const std::size_t T = 8;
  const double z = 2.0;
  double brute = 0.0;
  for (std::uint64_t leaf = 0; leaf < T; ++leaf) {
    std::set<std::pair<unsigned, std::uint64_t>> path;
    for (unsigned level = 0; (std::uint64_t{1} << level) <= T; ++level) path.insert({level, leaf >> level});
    brute = std::max(brute, static_cast<double>(path.size()) * 0.5 / (z * z));
  }
  const double rho = dpftrl::account_zcdp(1.0, z, T, 1);
  const long double ref = 0.25L + 2.0L * std::sqrt(0.25L * std::log(1e10L));
  const double eps = dpftrl::zcdp_to_eps(0.25, 1e-10);
  const bool ok = rho == 0.5 && brute == 0.5 && std::abs(eps - 5.048) <= 0.001 &&
                  std::abs(static_cast<long double>(eps) - ref) <= 1e-9L;
  return {ok, "rho = " + fmt("%.17g", rho) + " (brute force " + fmt("%.17g", brute) + "), eps = " +
                  fmt("%.6f", eps) + " (independent " + fmt("%.6f", static_cast<double>(ref)) + ")"};
}

// 6. Budget gate with rho 1.31 and 0.25 against 0.81.
Verdict budget_gate() {
  // T = 8 rounds with min_separation 8 gives k_max = 1 and tree height 4,
  // so rho = 2 / z^2.
  auto run = [](double target, const std::string& name) {
    const double z = std::sqrt(2.0 / target);
    std::ostringstream extra;
    extra.precision(17);
    extra << "mode = DP_ONLY\ntrain.rounds = 8\n"
          << "dp.noise_multiplier = " << z << "\ndp.budget = 0.81\noutput.dir = "
          << workdir(name).string() << "\n";
    auto cfg = harness::parse_config(corpus_config(extra.str(), 8));
    return harness::run_experiment(cfg);
  };
  const auto high = run(1.31, "gate_high");
  const auto low = run(0.25, "gate_low");
  const fs::path high_ckpt = high.metrics_path.parent_path() / "checkpoint.bin";
  const fs::path low_ckpt = low.metrics_path.parent_path() / "checkpoint.bin";
  const bool ok = std::abs(high.ledger.total_rho - 1.31) < 1e-12 &&
                  high.ledger.verdict == dpftrl::Verdict::kFail && !fs::exists(high_ckpt) &&
                  !high.checkpoint && std::abs(low.ledger.total_rho - 0.25) < 1e-12 &&
                  low.ledger.verdict == dpftrl::Verdict::kPass && fs::exists(low_ckpt);
  return {ok, "rho " + fmt("%.4f", high.ledger.total_rho) + " -> " +
                  dpftrl::verdict_name(high.ledger.verdict) + (fs::exists(high_ckpt) ? " with" : " without") +
                  " checkpoint; rho " + fmt("%.4f", low.ledger.total_rho) + " -> " +
                  dpftrl::verdict_name(low.ledger.verdict) + (fs::exists(low_ckpt) ? " with" : " without") +
                  " checkpoint"};
}

// 7. Noiseless DP_SECAGG_DDP reproduces BASELINE per-round metrics.
Verdict noiseless_equivalence() {
  const double scale = 65536.0;
  const auto base = harness::parse_config(corpus_config("mode = BASELINE\ntrain.rounds = 20\n"));
  const auto ddp = harness::parse_config(corpus_config(
      "mode = DP_SECAGG_DDP\ntrain.rounds = 20\ndp.noise_multiplier = 0\nddp.mu = 0\n"
      "ddp.scale = 65536\nsecagg.bits = 32\nfederation.dropout_rate = 0\n"));
  const auto rep = harness::compare(base, ddp, workdir("equivalence"));
  double worst = 0.0;
  for (const auto& r : rep.rows)
    worst = std::max({worst, std::abs(r.accuracy_delta), std::abs(r.picked_ratio_delta),
                      std::abs(r.log_loss_delta)});
  const double tol = 2.0 / scale;
  return {rep.rows.size() == 20 && worst <= tol,
          "max per-round metric delta " + fmt("%.3g", worst) + " over " + std::to_string(rep.rows.size()) +
              " rounds (limit 2/s = " + fmt("%.3g", tol) + ", s = 65536)"};
}

// 8. BASELINE beats the majority-class oracle.
Verdict utility_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = harness::parse_config(corpus_config("mode = BASELINE\ntrain.rounds = 50\n"));
  cfg.output_dir = workdir("utility").string();
  const auto result = harness::run_experiment(cfg);
  const double secs = seconds_since(t0);
  const auto split = harness::split_corpus(harness::read_corpus_lines(cfg.corpus_path), cfg.users,
                                           cfg.vocab_size);
  const double majority = harness::majority_baseline_accuracy(split);
  const double acc = result.metrics.back().metrics.prediction_accuracy;
  return {acc > majority && secs < 300.0,
          "final prediction_accuracy " + fmt("%.4f", acc) + " vs majority-class " + fmt("%.4f", majority) +
              ", run took " + fmt("%.1f", secs) + " s"};
}

// 9. Two `train` invocations produce byte-identical artifacts.
Verdict determinism() {
  const auto dir = workdir("determinism");
  const auto cfg_path = dir / "train.cfg";
  std::ofstream(cfg_path) << corpus_config(
      "mode = DP_SECAGG_DDP\ntrain.rounds = 10\ndp.noise_multiplier = 0.8\nddp.mu = 30\n"
      "ddp.scale = 512\nfederation.dropout_rate = 0.1\n");
  std::string detail;
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + FEDSHIELD_CLI + "\" train --config \"" + cfg_path.string() +
                            "\" --out \"" + (dir / run).string() + "\" > \"" + (dir / run).string() +
                            ".log\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      ok = false;
      detail += std::string("train run ") + run + " exited with " + std::to_string(rc) + "; ";
    }
  }
  int identical = 0;
  for (const char* file : {"metrics.csv", "ledger.json", "checkpoint.bin"}) {
    const auto a = dir / "a" / file, b = dir / "b" / file;
    if (fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b) && !slurp(a).empty()) ++identical;
  }
  ok = ok && identical == 3;
  return {ok, detail + std::to_string(identical) + "/3 artifacts byte-identical"};
}

// 10. Min-separation audit and telemetry hygiene over 200 rounds.
Verdict separation_and_hygiene() {
  auto cfg = harness::parse_config(corpus_config(
      "mode = DP_SECAGG_DDP\ntrain.rounds = 200\ndp.noise_multiplier = 1\nddp.mu = 10\n"
      "ddp.scale = 256\nfederation.dropout_rate = 0.1\nsecagg.transcript = transcript.jsonl\n"));
  cfg.output_dir = workdir("separation").string();
  const auto result = harness::run_experiment(cfg);
  std::map<std::size_t, std::int64_t> last;
  std::size_t violations = 0;
  for (const auto& rec : result.audit_log) {
    auto it = last.find(rec.client);
    if (it != last.end() && rec.round_index - it->second < 4) ++violations;
    last[rec.client] = rec.round_index;
  }
  std::size_t leaks = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
    ++files;
    const auto text = slurp(entry.path());
    for (const auto& id : result.user_ids) leaks += text.find(id) != std::string::npos;
  }
  return {violations == 0 && leaks == 0 && !result.audit_log.empty(),
          std::to_string(result.audit_log.size()) + " participations, " + std::to_string(violations) +
              " pairs closer than 4 rounds; " + std::to_string(leaks) + " user_id hits across " +
              std::to_string(files) + " emitted files"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"secagg exactness", secagg_exactness},
      {"secagg masking uniformity and share independence", secagg_masking},
      {"ddp end-to-end unbiasedness", ddp_unbiasedness},
      {"dp-ftrl cumulative noise variance law", tree_noise_law},
      {"accountant oracle and epsilon conversion", accountant_oracle},
      {"budget gate", budget_gate},
      {"noiseless reduction equivalence", noiseless_equivalence},
      {"utility above majority-class baseline", utility_sanity},
      {"train determinism", determinism},
      {"min-separation audit and telemetry hygiene", separation_and_hygiene},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %zu: %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

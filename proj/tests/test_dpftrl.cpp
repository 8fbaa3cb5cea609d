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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

#include "fedshield/dpftrl/accountant.hpp"
#include "fedshield/dpftrl/noise_tree.hpp"
#include "fedshield/dpftrl/server_optimizer.hpp"
#include "fedshield/error.hpp"

using namespace fedshield::dpftrl;
using fedshield::Error;
using fedshield::model::ParameterVector;

namespace {

double mc_variance(std::size_t horizon, std::size_t t, double sigma, int trials,
                   std::size_t minus = 0) {
  double m = 0, m2 = 0;
  for (int s = 0; s < trials; ++s) {
    const NoiseTree tree(horizon, 1, sigma, static_cast<std::uint64_t>(s));
    double x = tree.cumulative_noise(t)[0];
    if (minus) x -= tree.cumulative_noise(minus)[0];
    m += x;
    m2 += x * x;
  }
  m /= trials;
  return m2 / trials - m * m;
}

}  // namespace

TEST(NoiseTree, ZeroSigmaIsZero) {
  const NoiseTree tree(8, 3, 0.0, 1);
  for (std::size_t t = 1; t <= 8; ++t) EXPECT_EQ(tree.cumulative_noise(t), ParameterVector(3));
}

TEST(NoiseTree, PrefixNodesFollowBinaryExpansion) {
  for (std::size_t t = 1; t <= 64; ++t) {
    const auto nodes = NoiseTree::prefix_nodes(t);
    EXPECT_EQ(nodes.size(), static_cast<std::size_t>(std::popcount(t)));
    std::uint64_t covered = 0;
    for (const auto& n : nodes) {
      EXPECT_EQ(n.index << n.level, covered);  // left-to-right dyadic blocks
      covered += std::uint64_t{1} << n.level;
    }
    EXPECT_EQ(covered, t);
  }
}

TEST(NoiseTree, VarianceLawAtThreeAndFour) {
  const double sigma = 1.5;
  EXPECT_NEAR(mc_variance(8, 3, sigma, 100000), 2 * sigma * sigma, 0.05 * 2 * sigma * sigma);
  EXPECT_NEAR(mc_variance(8, 4, sigma, 100000), sigma * sigma, 0.05 * sigma * sigma);
}

TEST(NoiseTree, DifferencesReuseNodes) {
  const double sigma = 1.0;
  const std::size_t T = 16;
  const double h = std::ceil(std::log2(T)) + 1;
  for (std::size_t t = 2; t <= T; ++t) {
    const double v = mc_variance(T, t, sigma, 20000, t - 1);
    EXPECT_LE(v, h * sigma * sigma * 1.05) << "t=" << t;
  }
  // The 3 -> 4 step cancels nothing shared: {4} vs {2, 1}, three nodes total.
  EXPECT_NEAR(mc_variance(T, 4, sigma, 50000, 3), 3.0, 0.15);
}

TEST(NoiseTree, RangeChecked) {
  const NoiseTree tree(4, 1, 1.0, 1);
  EXPECT_THROW(tree.cumulative_noise(0), Error);
  EXPECT_THROW(tree.cumulative_noise(5), Error);
}

TEST(ServerStep, NoiselessIsFederatedAveraging) {
  const ParameterVector init(std::vector<double>{1.0, -2.0});
  ServerOptimizerState s(init, 1.0, 0.0, 10);
  const NoiseTree tree(5, 2, 0.0, 3);
  std::vector<double> expect = init.values();
  for (std::size_t t = 1; t <= 5; ++t) {
    const ParameterVector u(std::vector<double>{0.1 * t, -0.05});
    s = server_step(s, u, tree, t);
    for (int i = 0; i < 2; ++i) expect[i] += u[i];
    for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(s.checkpoint()[i], expect[i]);
  }
  EXPECT_THROW(server_step(s, ParameterVector(2), tree, 7), Error);
}

TEST(ServerStep, OneRoundAddsScaledNoise) {
  const ParameterVector init(std::vector<double>{0.5, 0.5, 0.5});
  const std::size_t n = 20;
  const double lr = 0.7;
  ServerOptimizerState s(init, lr, 0.0, n);
  const NoiseTree tree(4, 3, 2.0, 77);
  const ParameterVector u(std::vector<double>{0.1, 0.2, -0.3});
  s = server_step(s, u, tree, 1);
  const auto noise = tree.node_noise({0, 0});
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(s.checkpoint()[i] - init[i], lr * (u[i] + noise[i] / n), 1e-12);
}

TEST(ServerStep, RestartReanchors) {
  ServerOptimizerState s(ParameterVector(std::vector<double>{0.0}), 1.0, 0.0, 1);
  const NoiseTree tree(2, 1, 0.0, 1);
  s = server_step(s, ParameterVector(std::vector<double>{1.0}), tree, 1);
  s.restart();
  EXPECT_EQ(s.anchor()[0], 1.0);
  EXPECT_EQ(s.steps(), 0u);
  s = server_step(s, ParameterVector(std::vector<double>{2.0}), tree, 1);
  EXPECT_EQ(s.checkpoint()[0], 3.0);
}

TEST(Accountant, BruteForceNodeComposition) {
  // One participation at any round t touches the leaf-to-root path of t;
  // each touched node is a Gaussian mechanism with rho = (C / (zC))^2 / 2.
  // Adjacent datasets differ at one round, so take the worst round.
  const std::size_t T = 8;
  const double z = 2.0;
  double worst = 0;
  for (std::uint64_t t = 0; t < T; ++t) {
    std::set<std::pair<unsigned, std::uint64_t>> touched;
    for (unsigned level = 0; (std::uint64_t{1} << level) <= T; ++level)
      touched.insert({level, t >> level});
    worst = std::max(worst, static_cast<double>(touched.size()) / (2 * z * z));
  }
  EXPECT_EQ(worst, 0.5);
  EXPECT_EQ(account_zcdp(1.0, z, T, 1), 0.5);
  EXPECT_EQ(account_zcdp(3.0, z, T, 1), 0.5);  // sigma scales with C
}

TEST(Accountant, LimitsAndMonotonicity) {
  EXPECT_EQ(account_zcdp(1, 2, 0, 1), 0.0);
  EXPECT_EQ(account_zcdp(1, INFINITY, 8, 1), 0.0);
  EXPECT_LT(account_zcdp(1, 1e6, 8, 1), 1e-11);
  EXPECT_DOUBLE_EQ(account_zcdp(1, 2, 100, 6), 2 * account_zcdp(1, 2, 100, 3));
  double prev_z = INFINITY;
  for (double z : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double r = account_zcdp(1, z, 64, 4);
    EXPECT_LT(r, prev_z);
    prev_z = r;
  }
  for (std::size_t T = 1; T < 200; ++T) {
    EXPECT_LE(account_zcdp(1, 1, T, 2), account_zcdp(1, 1, T + 1, 2));
    EXPECT_LE(account_zcdp(1, 1, T, 2), account_zcdp(1, 1, T, 3));
  }
  EXPECT_THROW(account_zcdp(1, 0, 8, 1), Error);
}

TEST(Accountant, KmaxFromMinSeparation) {
  EXPECT_EQ(max_participations(200, 4), 50u);
  EXPECT_EQ(max_participations(10, 4), 3u);
  EXPECT_EQ(tree_height(8), 4u);
  EXPECT_EQ(tree_height(9), 5u);
  EXPECT_EQ(tree_height(1), 1u);
}

TEST(Accountant, RestartsComposeAdditively) {
  const double whole = account_zcdp_with_restarts(1, 2, 16, 1, 0);
  EXPECT_EQ(whole, account_zcdp(1, 2, 16, 16));
  const double two = account_zcdp_with_restarts(1, 2, 16, 1, 8);
  EXPECT_DOUBLE_EQ(two, 2 * account_zcdp(1, 2, 8, 8));
}

TEST(Conversion, ClosedFormValues) {
  EXPECT_EQ(zcdp_to_eps(0.0, 1e-5), 0.0);
  EXPECT_NEAR(zcdp_to_eps(0.25, 1e-10), 5.048, 1e-3);
  // Independent evaluation: eps = rho + sqrt(4 rho ln(1/delta)).
  for (double rho : {0.01, 0.25, 0.81, 1.31, 3.0})
    for (double delta : {1e-5, 1e-10}) {
      const double ref = rho + std::sqrt(4.0 * rho * std::log(1.0 / delta));
      EXPECT_NEAR(zcdp_to_eps(rho, delta), ref, 1e-9 * ref);
    }
  EXPECT_GT(zcdp_to_eps(1.31, 1e-10), zcdp_to_eps(0.81, 1e-10));
  EXPECT_THROW(zcdp_to_eps(0.1, 0.0), Error);
}

TEST(Budget, InclusiveGate) {
  PrivacyLedger l;
  l.total_rho = 0.25;
  EXPECT_EQ(check_budget(l, 0.81), Verdict::kPass);
  l.total_rho = 1.31;
  EXPECT_EQ(check_budget(l, 0.81), Verdict::kFail);
  l.total_rho = 0.81;
  EXPECT_EQ(check_budget(l, 0.81), Verdict::kPass);
  l.total_rho = INFINITY;
  EXPECT_EQ(check_budget(l, 0.81), Verdict::kFail);
  EXPECT_EQ(check_budget(l, INFINITY), Verdict::kPass);
}

TEST(Ledger, JsonShapeAndNulls) {
  LedgerInputs in;
  in.noise_multiplier = 2;
  in.rounds = 8;
  in.min_separation = 8;
  in.ddp_rho_per_round = INFINITY;
  in.deltas = {1e-5, 1e-10};
  const auto l = build_ledger(in);
  EXPECT_EQ(l.rho_central, 0.5);
  EXPECT_EQ(l.total_rho, 0.5);
  const auto j = ledger_to_json(l);
  EXPECT_TRUE(j["rho_ddp"].is_null());
  EXPECT_EQ(j["k_max"], 1);
  EXPECT_EQ(j["conversions"].size(), 2u);
  EXPECT_EQ(j["verdict"], "PASS");
}

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

#include <cmath>
#include <random>

#include "fedshield/error.hpp"
#include "fedshield/model/checkpoint.hpp"
#include "fedshield/model/model.hpp"

namespace fm = fedshield::model;
using fedshield::Error;
using fedshield::ErrorCode;

namespace {

// Independent restatement of the architecture for the finite-difference
// oracle: embeddings, mean-pool, tanh hidden layer, softmax cross entropy.
double reference_loss(std::size_t V, std::size_t E, const std::vector<double>& p,
                      const fm::Example& ex) {
  const std::size_t H = E;
  const double* emb = p.data();
  const double* w1 = emb + V * E;
  const double* w2 = w1 + H * E;
  const double* b1 = w2 + V * H;
  const double* b2 = b1 + H;
  std::vector<double> pooled(E, 0.0), hidden(H), logits(V);
  for (int c = 0; c < ex.context_len; ++c)
    for (std::size_t e = 0; e < E; ++e) pooled[e] += emb[ex.context[c] * E + e] / ex.context_len;
  for (std::size_t h = 0; h < H; ++h) {
    double z = b1[h];
    for (std::size_t e = 0; e < E; ++e) z += w1[h * E + e] * pooled[e];
    hidden[h] = std::tanh(z);
  }
  double mx = -1e300;
  for (std::size_t v = 0; v < V; ++v) {
    double z = b2[v];
    for (std::size_t h = 0; h < H; ++h) z += w2[v * H + h] * hidden[h];
    logits[v] = z;
    mx = std::max(mx, z);
  }
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return mx + std::log(s) - logits[ex.target];
}

fm::LocalDataset dataset(std::vector<std::vector<fm::TokenId>> seqs) {
  return fm::LocalDataset{"x", std::move(seqs)};
}

}  // namespace

TEST(Model, ParameterCountClosedForm) {
  // V=100, E=H=16: 100*16 + 16*16 + 100*16 + 16 + 100.
  const auto shape = fm::ModelShape::make(100, 16);
  EXPECT_EQ(shape.parameter_count(), 1600u + 256u + 1600u + 16u + 100u);
  EXPECT_EQ(fm::init_model(shape, 1).size(), 3572u);
}

TEST(Model, InitDeterministicAndSeedSensitive) {
  const auto shape = fm::ModelShape::make(2, 1);
  EXPECT_EQ(fm::init_model(shape, 7), fm::init_model(shape, 7));
  EXPECT_NE(fm::init_model(shape, 7), fm::init_model(shape, 8));
  for (double v : fm::init_model(fm::ModelShape::make(30, 4), 3)) {
    EXPECT_GE(v, -0.05);
    EXPECT_LT(v, 0.05);
  }
}

TEST(Model, GradientMatchesFiniteDifferences) {
  const std::size_t V = 4, E = 3;
  const auto shape = fm::ModelShape::make(V, E);
  ASSERT_EQ(shape.parameter_count(), 40u);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::vector<double> p(40);
  for (auto& v : p) v = u(rng);

  for (const auto& ex : {fm::Example{{1, 3}, 2, 0}, fm::Example{{2, 0}, 1, 3}}) {
    std::vector<double> grad(40, 0.0);
    const double loss = fm::loss_and_gradient(shape, p, ex, grad);
    EXPECT_NEAR(loss, reference_loss(V, E, p, ex), 1e-12);
    const double h = 1e-5;
    for (std::size_t j = 0; j < p.size(); ++j) {
      auto plus = p, minus = p;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (reference_loss(V, E, plus, ex) - reference_loss(V, E, minus, ex)) / (2 * h);
      const double scale = std::max(std::abs(fd), std::abs(grad[j]));
      if (scale < 1e-9) continue;
      EXPECT_LT(std::abs(fd - grad[j]) / scale, 1e-4) << "parameter " << j;
    }
  }
}

TEST(Model, SingleStepDeltaIsNegativeLrTimesGradient) {
  const auto shape = fm::ModelShape::make(4, 3);
  const auto base = fm::init_model(shape, 5);
  const auto data = dataset({{1, 2}});
  const double lr = 0.3;
  const auto update = fm::local_train(shape, base, data, 1, lr, 9);
  std::vector<double> grad(shape.parameter_count(), 0.0);
  fm::loss_and_gradient(shape, base.span(), fm::examples_of(data)[0], grad);
  ASSERT_EQ(update.weight, 1u);
  for (std::size_t j = 0; j < grad.size(); ++j) EXPECT_NEAR(update.delta[j], -lr * grad[j], 1e-15);
}

TEST(Model, LocalTrainZeroLrAndDeterminism) {
  const auto shape = fm::ModelShape::make(6, 2);
  const auto base = fm::init_model(shape, 1);
  const auto data = dataset({{1, 2, 3, 4}, {5, 1}});
  const auto zero = fm::local_train(shape, base, data, 2, 0.0, 3);
  EXPECT_EQ(zero.delta, fm::ParameterVector(shape.parameter_count()));
  EXPECT_EQ(zero.weight, 4u);
  EXPECT_EQ(fm::local_train(shape, base, data, 2, 0.1, 3).delta,
            fm::local_train(shape, base, data, 2, 0.1, 3).delta);
  try {
    fm::local_train(shape, base, dataset({{1}}), 1, 0.1, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

TEST(Model, ClipUpdate) {
  const auto clipped = fm::clip_update(fm::ParameterVector(std::vector<double>{3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(clipped[0], 0.6);
  EXPECT_DOUBLE_EQ(clipped[1], 0.8);
  const fm::ParameterVector small(std::vector<double>{0.1, -0.2});
  EXPECT_EQ(fm::clip_update(small, 1.0), small);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1000);
    for (auto& x : v) x = n(rng) * (trial % 7);
    const fm::ParameterVector d(v);
    const double c = 0.5 + trial % 3;
    const auto out = fm::clip_update(d, c);
    EXPECT_LE(out.l2_norm(), c + 1e-9);
    EXPECT_EQ(fm::clip_update(out, c), out);
    if (d.l2_norm() == 0) continue;
    double dot = 0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * out[i];
    EXPECT_NEAR(dot / (d.l2_norm() * out.l2_norm()), 1.0, 1e-9);
  }
}

TEST(Model, MetricsDirectRatios) {
  // Three events over V=3: the model's top-1 is [0, 1, 2] against targets
  // [0, 2, 2], so two of three are right.
  fm::MetricsAccumulator acc(1);
  acc.add(std::vector<double>{3, 1, 0}, 0);
  acc.add(std::vector<double>{0, 2, 1}, 2);
  acc.add(std::vector<double>{0, 1, 5}, 2);
  const auto r = acc.report();
  EXPECT_DOUBLE_EQ(r.prediction_accuracy, 2.0 / 3.0);
  EXPECT_EQ(r.n_eval, 3u);

  fm::MetricsAccumulator all(3);
  all.add(std::vector<double>{0, 2, 1}, 0);
  EXPECT_DOUBLE_EQ(all.report().picked_ratio_proxy, 1.0);
}

TEST(Model, UniformLogitsGiveLogV) {
  const auto shape = fm::ModelShape::make(10, 2);
  const fm::ParameterVector zeros(shape.parameter_count());
  const std::vector<fm::LocalDataset> heldout{dataset({{1, 2, 3, 9, 0, 4}})};
  const auto r = fm::evaluate(shape, zeros, heldout, 10);
  EXPECT_NEAR(r.mean_log_loss, std::log(10.0), 1e-6);
  EXPECT_DOUBLE_EQ(r.picked_ratio_proxy, 1.0);
}

TEST(Model, AccuracyNeverExceedsPickedRatio) {
  const auto shape = fm::ModelShape::make(8, 3);
  const std::vector<fm::LocalDataset> heldout{dataset({{1, 2, 3, 4, 5, 6, 7, 1, 2}})};
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = fm::evaluate(shape, fm::init_model(shape, s), heldout, 2);
    EXPECT_LE(r.prediction_accuracy, r.picked_ratio_proxy);
  }
}

TEST(Model, PretrainNoOpAndDeterministic) {
  const auto shape = fm::ModelShape::make(6, 3);
  const auto p = fm::init_model(shape, 4);
  const auto pub = dataset({{1, 2, 3, 1, 2, 3, 4}});
  EXPECT_EQ(fm::pretrain(shape, p, pub, 0, 0.1, 1), p);
  EXPECT_EQ(fm::pretrain(shape, p, pub, 50, 0.1, 1), fm::pretrain(shape, p, pub, 50, 0.1, 1));
}

TEST(Model, VocabularyRanksByFrequencyThenLexicographic) {
  const auto v = fm::Vocabulary::build({{"b", "a", "b", "c"}, {"a", "d"}}, 4);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.token(0), "<oov>");
  EXPECT_EQ(v.token(1), "a");
  EXPECT_EQ(v.token(2), "b");
  EXPECT_EQ(v.token(3), "c");
  EXPECT_EQ(v.index_of("d"), fm::Vocabulary::kOov);
}

TEST(Checkpoint, RoundTripFloat32) {
  const fm::ParameterVector p(std::vector<double>{0.5, -1.25, 3.0, 0.1});
  const auto bytes = fm::encode_checkpoint(p);
  EXPECT_EQ(bytes.substr(0, 4), "FSHD");
  EXPECT_EQ(bytes.size(), 16u + 4u * 4u);
  const auto back = fm::decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[0], 0.5);
  EXPECT_EQ(back[1], -1.25);
  EXPECT_EQ(back[3], static_cast<double>(0.1f));
  EXPECT_THROW(fm::decode_checkpoint("FSHX" + bytes.substr(4)), Error);
  EXPECT_THROW(fm::decode_checkpoint(bytes.substr(0, bytes.size() - 1)), Error);
}

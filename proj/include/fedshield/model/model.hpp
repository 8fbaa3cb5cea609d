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

// Tiny next-word-prediction model: embedding lookup, mean-pooled context of
// width two, one tanh hidden layer and a softmax output over the vocabulary.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fedshield::model {

using TokenId = std::uint32_t;

// Lowercases and splits on ASCII whitespace.
std::vector<std::string> tokenize(std::string_view line);

class Vocabulary {
 public:
  static constexpr TokenId kOov = 0;
  static constexpr std::string_view kOovToken = "<oov>";

  // Keeps the `size - 1` most frequent tokens (ties broken lexicographically)
  // after the reserved out-of-vocabulary entry.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences,
                          std::size_t size);

  // `tokens[0]` is the OOV token; the rest must be unique.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  TokenId index_of(std::string_view token) const;
  const std::string& token(TokenId index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<TokenId> encode(const std::vector<std::string>& words) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Dense real-valued weights or update deltas. Layout is fixed by ModelShape.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t dimension, double fill = 0.0)
      : values_(dimension, fill) {}
  explicit ParameterVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  double l2_norm() const;
  bool all_finite() const;

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

// Flattening order: embedding rows (V x E), hidden weights (H x E), output
// weights (V x H), hidden bias (H), output bias (V). All matrices row-major.
struct ModelShape {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;

  // Hidden width equals the embedding width.
  static ModelShape make(std::size_t vocab_size, std::size_t embed_dim);

  std::size_t parameter_count() const;
  std::size_t embedding_offset() const { return 0; }
  std::size_t hidden_weight_offset() const { return vocab_size * embed_dim; }
  std::size_t output_weight_offset() const {
    return hidden_weight_offset() + hidden_dim * embed_dim;
  }
  std::size_t hidden_bias_offset() const {
    return output_weight_offset() + vocab_size * hidden_dim;
  }
  std::size_t output_bias_offset() const { return hidden_bias_offset() + hidden_dim; }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

struct LocalDataset {
  std::string user_id;  // simulation-only; never written to outputs
  std::vector<std::vector<TokenId>> sequences;

  // Number of next-token events: one per position after the first.
  std::size_t example_count() const;
};

// One next-token event. Context holds the previous one or two tokens.
struct Example {
  std::array<TokenId, 2> context{};
  std::uint8_t context_len = 0;
  TokenId target = 0;
};

std::vector<Example> examples_of(const LocalDataset& data);

struct ClientUpdate {
  ParameterVector delta;
  std::size_t weight = 0;
  std::int64_t round_index = 0;
};

struct MetricsReport {
  double prediction_accuracy = 0.0;
  double picked_ratio_proxy = 0.0;
  double mean_log_loss = 0.0;
  std::size_t n_eval = 0;
};

// Uniform(-0.05, 0.05) per entry.
ParameterVector init_model(const ModelShape& shape, std::uint64_t seed);
ParameterVector init_model(const Vocabulary& vocab, std::size_t embed_dim,
                           std::uint64_t seed);

void forward_logits(const ModelShape& shape, std::span<const double> params,
                    const Example& example, std::span<double> logits);

// Cross-entropy loss of one example. Adds d(loss)/d(params) into `grad`.
double loss_and_gradient(const ModelShape& shape, std::span<const double> params,
                         const Example& example, std::span<double> grad);

// Per-example SGD over a seed-determined shuffle, `epochs` passes.
ClientUpdate local_train(const ModelShape& shape, const ParameterVector& base,
                         const LocalDataset& data, int epochs, double lr,
                         std::uint64_t seed, std::int64_t round_index = 0);

// delta * min(1, clip_norm / ||delta||).
ParameterVector clip_update(const ParameterVector& delta, double clip_norm);

class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::size_t top_k) : top_k_(top_k) {}

  // Rank of the target is the number of logits strictly above it plus the
  // number of equal logits at lower indices.
  void add(std::span<const double> logits, TokenId target);
  MetricsReport report() const;

 private:
  std::size_t top_k_;
  std::size_t events_ = 0;
  std::size_t top1_hits_ = 0;
  std::size_t topk_hits_ = 0;
  double log_loss_sum_ = 0.0;
};

MetricsReport evaluate(const ModelShape& shape, const ParameterVector& params,
                       std::span<const LocalDataset> heldout, std::size_t k);

// Central SGD on public data: `steps` single-example updates, cycling through
// seed-shuffled epochs.
ParameterVector pretrain(const ModelShape& shape, const ParameterVector& params,
                         const LocalDataset& public_corpus, std::size_t steps,
                         double lr, std::uint64_t seed);

}  // namespace fedshield::model

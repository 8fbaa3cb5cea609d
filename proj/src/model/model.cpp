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

#include "fedshield/model/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fedshield/error.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::model {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences,
                             std::size_t size) {
  if (size < 2) throw Error(ErrorCode::kInvalidArgument, "vocabulary size must be >= 2");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& w : s)
      if (w != kOovToken) ++counts[w];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{std::string(kOovToken)};
  for (const auto& [word, count] : ranked) {
    if (tokens.size() == size) break;
    tokens.push_back(word);
  }
  // A tiny corpus can have fewer distinct words than requested.
  for (std::size_t i = 0; tokens.size() < size; ++i)
    tokens.push_back("<unused" + std::to_string(i) + ">");
  return Vocabulary(std::move(tokens));
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "vocabulary size must be >= 2");
  for (TokenId i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary token: " + tokens_[i]);
  }
}

TokenId Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOov : it->second;
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(index_of(w));
  return out;
}

double ParameterVector::l2_norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

bool ParameterVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ModelShape ModelShape::make(std::size_t vocab_size, std::size_t embed_dim) {
  if (vocab_size < 2) throw Error(ErrorCode::kInvalidArgument, "vocab_size must be >= 2");
  if (embed_dim < 1) throw Error(ErrorCode::kInvalidArgument, "embed_dim must be >= 1");
  return ModelShape{vocab_size, embed_dim, embed_dim};
}

std::size_t ModelShape::parameter_count() const {
  return vocab_size * embed_dim + hidden_dim * embed_dim + vocab_size * hidden_dim +
         hidden_dim + vocab_size;
}

std::size_t LocalDataset::example_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size() > 1 ? s.size() - 1 : 0;
  return n;
}

std::vector<Example> examples_of(const LocalDataset& data) {
  std::vector<Example> out;
  out.reserve(data.example_count());
  for (const auto& seq : data.sequences) {
    for (std::size_t p = 1; p < seq.size(); ++p) {
      Example ex;
      if (p >= 2) {
        ex.context = {seq[p - 2], seq[p - 1]};
        ex.context_len = 2;
      } else {
        ex.context = {seq[p - 1], 0};
        ex.context_len = 1;
      }
      ex.target = seq[p];
      out.push_back(ex);
    }
  }
  return out;
}

ParameterVector init_model(const ModelShape& shape, std::uint64_t seed) {
  ParameterVector params(shape.parameter_count());
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = dist(rng);
  return params;
}

ParameterVector init_model(const Vocabulary& vocab, std::size_t embed_dim,
                           std::uint64_t seed) {
  return init_model(ModelShape::make(vocab.size(), embed_dim), seed);
}

namespace {

struct Activations {
  std::vector<double> pooled;
  std::vector<double> hidden;
  std::vector<double> logits;
};

void forward(const ModelShape& shape, std::span<const double> p, const Example& ex,
             Activations& act) {
  const std::size_t E = shape.embed_dim, H = shape.hidden_dim, V = shape.vocab_size;
  act.pooled.assign(E, 0.0);
  act.hidden.resize(H);
  act.logits.resize(V);
  const double inv = 1.0 / ex.context_len;
  for (std::size_t c = 0; c < ex.context_len; ++c) {
    const double* row = p.data() + shape.embedding_offset() + ex.context[c] * E;
    for (std::size_t e = 0; e < E; ++e) act.pooled[e] += row[e];
  }
  for (double& v : act.pooled) v *= inv;
  const double* w1 = p.data() + shape.hidden_weight_offset();
  const double* b1 = p.data() + shape.hidden_bias_offset();
  for (std::size_t h = 0; h < H; ++h) {
    double z = b1[h];
    for (std::size_t e = 0; e < E; ++e) z += w1[h * E + e] * act.pooled[e];
    act.hidden[h] = std::tanh(z);
  }
  const double* w2 = p.data() + shape.output_weight_offset();
  const double* b2 = p.data() + shape.output_bias_offset();
  for (std::size_t v = 0; v < V; ++v) {
    double z = b2[v];
    for (std::size_t h = 0; h < H; ++h) z += w2[v * H + h] * act.hidden[h];
    act.logits[v] = z;
  }
}

double log_sum_exp(std::span<const double> x) {
  double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void check_example(const ModelShape& shape, const Example& ex) {
  if (ex.context_len < 1 || ex.context_len > 2 || ex.target >= shape.vocab_size ||
      ex.context[0] >= shape.vocab_size ||
      (ex.context_len == 2 && ex.context[1] >= shape.vocab_size))
    throw Error(ErrorCode::kInvalidArgument, "token index out of vocabulary range");
}

}  // namespace

void forward_logits(const ModelShape& shape, std::span<const double> params,
                    const Example& example, std::span<double> logits) {
  check_example(shape, example);
  Activations act;
  forward(shape, params, example, act);
  std::copy(act.logits.begin(), act.logits.end(), logits.begin());
}

double loss_and_gradient(const ModelShape& shape, std::span<const double> params,
                         const Example& ex, std::span<double> grad) {
  if (params.size() != shape.parameter_count() || grad.size() != params.size())
    throw Error(ErrorCode::kInvalidArgument, "parameter dimension mismatch");
  check_example(shape, ex);
  const std::size_t E = shape.embed_dim, H = shape.hidden_dim, V = shape.vocab_size;
  Activations act;
  forward(shape, params, ex, act);
  const double lse = log_sum_exp(act.logits);
  const double loss = lse - act.logits[ex.target];

  // dL/dlogits = softmax - onehot
  std::vector<double> dlogits(V);
  for (std::size_t v = 0; v < V; ++v) dlogits[v] = std::exp(act.logits[v] - lse);
  dlogits[ex.target] -= 1.0;

  const double* w2 = params.data() + shape.output_weight_offset();
  double* gw2 = grad.data() + shape.output_weight_offset();
  double* gb2 = grad.data() + shape.output_bias_offset();
  std::vector<double> dhidden(H, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    gb2[v] += dlogits[v];
    for (std::size_t h = 0; h < H; ++h) {
      gw2[v * H + h] += dlogits[v] * act.hidden[h];
      dhidden[h] += w2[v * H + h] * dlogits[v];
    }
  }

  const double* w1 = params.data() + shape.hidden_weight_offset();
  double* gw1 = grad.data() + shape.hidden_weight_offset();
  double* gb1 = grad.data() + shape.hidden_bias_offset();
  std::vector<double> dpooled(E, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = dhidden[h] * (1.0 - act.hidden[h] * act.hidden[h]);
    gb1[h] += dz;
    for (std::size_t e = 0; e < E; ++e) {
      gw1[h * E + e] += dz * act.pooled[e];
      dpooled[e] += w1[h * E + e] * dz;
    }
  }

  const double inv = 1.0 / ex.context_len;
  for (std::size_t c = 0; c < ex.context_len; ++c) {
    double* row = grad.data() + shape.embedding_offset() + ex.context[c] * E;
    for (std::size_t e = 0; e < E; ++e) row[e] += dpooled[e] * inv;
  }
  return loss;
}

namespace {

// Runs `steps` SGD steps on `params` in place, reshuffling every pass.
void sgd(const ModelShape& shape, std::vector<double>& params,
         const std::vector<Example>& examples, std::size_t steps, double lr,
         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> order(examples.size());
  std::vector<double> grad(params.size());
  std::size_t done = 0;
  while (done < steps) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size() && done < steps; ++i, ++done) {
      std::fill(grad.begin(), grad.end(), 0.0);
      loss_and_gradient(shape, params, examples[order[i]], grad);
      for (std::size_t j = 0; j < params.size(); ++j) params[j] -= lr * grad[j];
    }
  }
}

}  // namespace

ClientUpdate local_train(const ModelShape& shape, const ParameterVector& base,
                         const LocalDataset& data, int epochs, double lr,
                         std::uint64_t seed, std::int64_t round_index) {
  if (base.size() != shape.parameter_count())
    throw Error(ErrorCode::kInvalidArgument, "base checkpoint dimension mismatch");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(lr >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be >= 0");
  const auto examples = examples_of(data);
  if (examples.empty()) throw Error(ErrorCode::kEmptyDataset, "client has no training examples");

  ClientUpdate update;
  update.weight = examples.size();
  update.round_index = round_index;
  if (lr == 0.0) {
    update.delta = ParameterVector(base.size());
    return update;
  }
  std::vector<double> params = base.values();
  sgd(shape, params, examples, examples.size() * static_cast<std::size_t>(epochs), lr, seed);
  for (std::size_t j = 0; j < params.size(); ++j) params[j] -= base[j];
  update.delta = ParameterVector(std::move(params));
  return update;
}

ParameterVector clip_update(const ParameterVector& delta, double clip_norm) {
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip_norm must be > 0");
  const double norm = delta.l2_norm();
  // The relative slack keeps clipping idempotent: a rescaled vector can land
  // a few ulps above clip_norm.
  if (norm <= clip_norm * (1.0 + 1e-12)) return delta;
  const double factor = clip_norm / norm;
  std::vector<double> out(delta.begin(), delta.end());
  for (double& v : out) v *= factor;
  return ParameterVector(std::move(out));
}

void MetricsAccumulator::add(std::span<const double> logits, TokenId target) {
  const double t = logits[target];
  std::size_t rank = 0;
  for (std::size_t v = 0; v < logits.size(); ++v)
    if (logits[v] > t || (logits[v] == t && v < target)) ++rank;
  ++events_;
  if (rank == 0) ++top1_hits_;
  if (rank < top_k_) ++topk_hits_;
  log_loss_sum_ += log_sum_exp(logits) - t;
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.n_eval = events_;
  if (events_ == 0) return r;
  const double n = static_cast<double>(events_);
  r.prediction_accuracy = top1_hits_ / n;
  r.picked_ratio_proxy = topk_hits_ / n;
  r.mean_log_loss = log_loss_sum_ / n;
  return r;
}

MetricsReport evaluate(const ModelShape& shape, const ParameterVector& params,
                       std::span<const LocalDataset> heldout, std::size_t k) {
  if (heldout.empty()) throw Error(ErrorCode::kEmptyDataset, "heldout set is empty");
  if (k < 1 || k > shape.vocab_size)
    throw Error(ErrorCode::kInvalidArgument, "k must be in [1, V]");
  if (params.size() != shape.parameter_count())
    throw Error(ErrorCode::kInvalidArgument, "parameter dimension mismatch");
  MetricsAccumulator acc(k);
  Activations act;
  for (const auto& data : heldout) {
    for (const auto& ex : examples_of(data)) {
      check_example(shape, ex);
      forward(shape, params.span(), ex, act);
      acc.add(act.logits, ex.target);
    }
  }
  auto report = acc.report();
  if (report.n_eval == 0) throw Error(ErrorCode::kEmptyDataset, "heldout set has no events");
  return report;
}

ParameterVector pretrain(const ModelShape& shape, const ParameterVector& params,
                         const LocalDataset& public_corpus, std::size_t steps,
                         double lr, std::uint64_t seed) {
  if (params.size() != shape.parameter_count())
    throw Error(ErrorCode::kInvalidArgument, "parameter dimension mismatch");
  if (!(lr >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be >= 0");
  const auto examples = examples_of(public_corpus);
  if (examples.empty()) throw Error(ErrorCode::kEmptyDataset, "public corpus has no examples");
  if (steps == 0) return params;
  std::vector<double> out = params.values();
  sgd(shape, out, examples, steps, lr, seed);
  return ParameterVector(std::move(out));
}

}  // namespace fedshield::model

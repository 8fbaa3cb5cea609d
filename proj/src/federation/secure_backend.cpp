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

#include <fstream>
#include <memory>

#include "fedshield/ddp/ddp.hpp"
#include "fedshield/error.hpp"
#include "fedshield/federation/federation.hpp"
#include "fedshield/secagg/session.hpp"
#include "fedshield/seeds.hpp"

namespace fedshield::federation {

std::size_t SecureBackend::resolved_degree(std::size_t n, std::size_t degree) {
  if (n < 2) return 0;
  const std::size_t k = degree == 0 ? std::size_t{50} : degree;
  return std::min(k, n - 1);
}

std::size_t SecureBackend::resolved_threshold(std::size_t k, std::size_t threshold) {
  if (threshold != 0) return threshold;
  return std::max<std::size_t>(1, (2 * k + 2) / 3);
}

Aggregate SecureBackend::aggregate(std::vector<std::optional<SealedUpdate>> cohort,
                                   std::int64_t round_index, std::uint64_t seed) {
  Aggregate out;
  const std::size_t n = cohort.size();
  std::size_t dimension = 0;
  for (const auto& slot : cohort)
    if (slot) dimension = slot->dimension();
  if (dimension == 0) {
    out.failure = "no client updates";
    return out;
  }

  ddp::DdpConfig dcfg;
  dcfg.clip_norm = config_.clip_norm;
  dcfg.scale = config_.scale;
  dcfg.field = secagg::FieldSpec::make(config_.field_bits);
  dcfg.mu = config_.mu;
  dcfg.clients = n;
  dcfg.validate();

  auto session = std::make_shared<secagg::SecAggConfig>();
  session->field = dcfg.field;
  session->dimension = dimension;
  const std::size_t k = resolved_degree(n, config_.degree);
  if (n < 2) {
    session->graph = secagg::CommGraph(std::vector<std::vector<std::uint32_t>>(n));
    session->threshold = 1;
  } else {
    session->threshold = resolved_threshold(k, config_.threshold);
    session->graph = secagg::build_topology(n, k, session->threshold,
                                            child_seed(seed, "secagg/topology"));
  }

  // Client side: quantize, perturb. Dropped clients never upload.
  std::vector<secagg::QuantizedVector> inputs;
  secagg::DropoutSchedule dropouts;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!cohort[i]) {
      inputs.push_back(secagg::QuantizedVector{dcfg.field, std::vector<std::uint32_t>(dimension)});
      dropouts[i] = secagg::Phase::kMaskedInput;
      continue;
    }
    auto q = ddp::quantize(open(*cohort[i]).delta, dcfg, child_seed(seed, "ddp/quantize", i));
    if (dcfg.mu > 0) q = ddp::add_discrete_noise(q, dcfg.mu, child_seed(seed, "ddp/noise", i));
    inputs.push_back(std::move(q));
  }
  cohort.clear();

  secagg::Transcript transcript;
  const auto result = secagg::run_secure_aggregation(
      session, inputs, dropouts, child_seed(seed, "secagg/session"), round_index,
      config_.transcript_path.empty() ? nullptr : &transcript);
  if (!config_.transcript_path.empty()) {
    std::ofstream f(config_.transcript_path, std::ios::app);
    transcript.write_jsonl(f);
  }
  if (result.status != secagg::Phase::kDone) {
    out.failure = result.failure;
    return out;
  }
  out.count = result.input_survivors.size();
  out.mean = ddp::dequantize_sum(*result.sum, out.count, dcfg);
  out.ok = true;
  return out;
}

}  // namespace fedshield::federation

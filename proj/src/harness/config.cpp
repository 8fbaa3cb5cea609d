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

#include "fedshield/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "fedshield/ddp/ddp.hpp"
#include "fedshield/error.hpp"
#include "fedshield/federation/federation.hpp"

#ifndef FEDSHIELD_DATA_DIR
#define FEDSHIELD_DATA_DIR "data"
#endif

namespace fedshield::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfig, key + ": " + what);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected a nonnegative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    bad(key, "expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

Mode to_mode(const std::string& v) {
  if (v == "BASELINE") return Mode::kBaseline;
  if (v == "DP_ONLY") return Mode::kDpOnly;
  if (v == "SECAGG_ONLY") return Mode::kSecAggOnly;
  if (v == "DP_SECAGG_DDP") return Mode::kDpSecAggDdp;
  bad("mode", "expected one of BASELINE, DP_ONLY, SECAGG_ONLY, DP_SECAGG_DDP; got '" + v + "'");
}

std::string fmt_double(double d) {
  if (std::isinf(d)) return "inf";
  std::ostringstream o;
  o.precision(17);
  o << d;
  return o.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode", [](auto& c, auto&, auto& v) { c.mode = to_mode(v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"data.corpus", [](auto& c, auto&, auto& v) { c.corpus_path = v; }},
      {"data.users", [](auto& c, auto& k, auto& v) { c.users = to_u64(k, v); }},
      {"model.vocab_size", [](auto& c, auto& k, auto& v) { c.vocab_size = to_u64(k, v); }},
      {"model.embed_dim", [](auto& c, auto& k, auto& v) { c.embed_dim = to_u64(k, v); }},
      {"train.rounds", [](auto& c, auto& k, auto& v) { c.rounds = to_u64(k, v); }},
      {"train.local_epochs", [](auto& c, auto& k, auto& v) { c.local_epochs = static_cast<int>(to_u64(k, v)); }},
      {"train.client_lr", [](auto& c, auto& k, auto& v) { c.client_lr = to_double(k, v); }},
      {"train.server_lr", [](auto& c, auto& k, auto& v) { c.server_lr = to_double(k, v); }},
      {"train.server_momentum", [](auto& c, auto& k, auto& v) { c.server_momentum = to_double(k, v); }},
      {"train.pretrain_steps", [](auto& c, auto& k, auto& v) { c.pretrain_steps = to_u64(k, v); }},
      {"train.pretrain_lr", [](auto& c, auto& k, auto& v) { c.pretrain_lr = to_double(k, v); }},
      {"federation.report_goal", [](auto& c, auto& k, auto& v) { c.report_goal = to_u64(k, v); }},
      {"federation.min_aggregation", [](auto& c, auto& k, auto& v) { c.min_aggregation = to_u64(k, v); }},
      {"federation.min_separation", [](auto& c, auto& k, auto& v) { c.min_separation = to_u64(k, v); }},
      {"federation.dropout_rate", [](auto& c, auto& k, auto& v) { c.dropout_rate = to_double(k, v); }},
      {"dp.clip_norm", [](auto& c, auto& k, auto& v) { c.clip_norm = to_double(k, v); }},
      {"dp.noise_multiplier", [](auto& c, auto& k, auto& v) { c.noise_multiplier = to_double(k, v); }},
      {"dp.restart_every", [](auto& c, auto& k, auto& v) { c.restart_every = to_u64(k, v); }},
      {"dp.budget", [](auto& c, auto& k, auto& v) { c.budget = to_double(k, v); }},
      {"dp.deltas",
       [](auto& c, auto& k, auto& v) {
         c.deltas.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.deltas.push_back(to_double(k, trim(item)));
       }},
      {"secagg.bits", [](auto& c, auto& k, auto& v) { c.secagg_bits = static_cast<unsigned>(to_u64(k, v)); }},
      {"secagg.threshold", [](auto& c, auto& k, auto& v) { c.secagg_threshold = to_u64(k, v); }},
      {"secagg.degree", [](auto& c, auto& k, auto& v) { c.secagg_degree = to_u64(k, v); }},
      {"secagg.transcript", [](auto& c, auto&, auto& v) { c.secagg_transcript = v; }},
      {"ddp.scale", [](auto& c, auto& k, auto& v) { c.ddp_scale = to_double(k, v); }},
      {"ddp.mu", [](auto& c, auto& k, auto& v) { c.ddp_mu = to_double(k, v); }},
      {"eval.top_k", [](auto& c, auto& k, auto& v) { c.top_k = to_u64(k, v); }},
      {"compare.tolerance", [](auto& c, auto& k, auto& v) { c.compare_tolerance = to_double(k, v); }},
      {"telemetry.record_wall_time", [](auto& c, auto& k, auto& v) { c.record_wall_time = to_bool(k, v); }},
      {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kBaseline: return "BASELINE";
    case Mode::kDpOnly: return "DP_ONLY";
    case Mode::kSecAggOnly: return "SECAGG_ONLY";
    case Mode::kDpSecAggDdp: return "DP_SECAGG_DDP";
  }
  return "UNKNOWN";
}

bool mode_uses_dp(Mode mode) { return mode == Mode::kDpOnly || mode == Mode::kDpSecAggDdp; }
bool mode_uses_secagg(Mode mode) {
  return mode == Mode::kSecAggOnly || mode == Mode::kDpSecAggDdp;
}

std::string default_corpus_path() { return std::string(FEDSHIELD_DATA_DIR) + "/corpus.txt"; }

void ExperimentConfig::validate() const {
  if (users < 1) bad("data.users", "must be >= 1");
  if (vocab_size < 2) bad("model.vocab_size", "must be >= 2");
  if (embed_dim < 1) bad("model.embed_dim", "must be >= 1");
  if (local_epochs < 1) bad("train.local_epochs", "must be >= 1");
  if (!(client_lr >= 0)) bad("train.client_lr", "must be >= 0");
  if (!(pretrain_lr >= 0)) bad("train.pretrain_lr", "must be >= 0");
  if (!(server_lr > 0)) bad("train.server_lr", "must be > 0");
  if (!(server_momentum >= 0 && server_momentum < 1)) bad("train.server_momentum", "must be in [0, 1)");
  if (min_aggregation < 1) bad("federation.min_aggregation", "must be >= 1");
  if (min_aggregation > report_goal)
    throw Error(ErrorCode::kConfig, "federation.min_aggregation (" + std::to_string(min_aggregation) +
                                        ") must not exceed federation.report_goal (" +
                                        std::to_string(report_goal) + ")");
  if (report_goal > users)
    throw Error(ErrorCode::kConfig, "federation.report_goal (" + std::to_string(report_goal) +
                                        ") must not exceed data.users (" + std::to_string(users) + ")");
  if (!(dropout_rate >= 0 && dropout_rate < 1)) bad("federation.dropout_rate", "must be in [0, 1)");
  if (!(clip_norm > 0)) bad("dp.clip_norm", "must be > 0");
  if (!(noise_multiplier >= 0)) bad("dp.noise_multiplier", "must be >= 0");
  if (!mode_uses_dp(mode) && noise_multiplier != 0)
    bad("dp.noise_multiplier", "must be 0 in mode " + mode_name(mode));
  if (!(budget >= 0)) bad("dp.budget", "must be >= 0");
  if (deltas.empty()) bad("dp.deltas", "must list at least one delta");
  for (double d : deltas)
    if (!(d > 0 && d < 1)) bad("dp.deltas", "every delta must be in (0, 1)");
  if (top_k < 1 || top_k > vocab_size) bad("eval.top_k", "must be in [1, model.vocab_size]");
  if (!(compare_tolerance >= 0)) bad("compare.tolerance", "must be >= 0");
  if (mode != Mode::kDpSecAggDdp && ddp_mu != 0) bad("ddp.mu", "must be 0 unless mode is DP_SECAGG_DDP");

  if (mode_uses_secagg(mode)) {
    if (secagg_bits < 1 || secagg_bits > 32) bad("secagg.bits", "must be in [1, 32]");
    if (report_goal < 2) bad("federation.report_goal", "secure aggregation needs at least 2 clients");
    const auto k = federation::SecureBackend::resolved_degree(report_goal, secagg_degree);
    const auto t = federation::SecureBackend::resolved_threshold(k, secagg_threshold);
    if (t > k)
      throw Error(ErrorCode::kConfig, "secagg.threshold (" + std::to_string(t) +
                                          ") must not exceed secagg.degree (" + std::to_string(k) + ")");
    ddp::DdpConfig d;
    d.clip_norm = clip_norm;
    d.scale = ddp_scale;
    d.field = secagg::FieldSpec::make(secagg_bits);
    d.mu = ddp_mu;
    d.clients = report_goal;
    try {
      d.validate();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kHeadroom)
        throw Error(ErrorCode::kHeadroom, std::string("ddp.scale/ddp.mu/dp.clip_norm/secagg.bits: ") + e.what());
      throw Error(ErrorCode::kConfig, std::string("ddp: ") + e.what());
    }
  }
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["mode"] = mode_name(mode);
  m["seed"] = std::to_string(seed);
  m["data.corpus"] = corpus_path.empty() ? default_corpus_path() : corpus_path;
  m["data.users"] = std::to_string(users);
  m["model.vocab_size"] = std::to_string(vocab_size);
  m["model.embed_dim"] = std::to_string(embed_dim);
  m["train.rounds"] = std::to_string(rounds);
  m["train.local_epochs"] = std::to_string(local_epochs);
  m["train.client_lr"] = fmt_double(client_lr);
  m["train.server_lr"] = fmt_double(server_lr);
  m["train.server_momentum"] = fmt_double(server_momentum);
  m["train.pretrain_steps"] = std::to_string(pretrain_steps);
  m["train.pretrain_lr"] = fmt_double(pretrain_lr);
  m["federation.report_goal"] = std::to_string(report_goal);
  m["federation.min_aggregation"] = std::to_string(min_aggregation);
  m["federation.min_separation"] = std::to_string(min_separation);
  m["federation.dropout_rate"] = fmt_double(dropout_rate);
  m["dp.clip_norm"] = fmt_double(clip_norm);
  m["dp.noise_multiplier"] = fmt_double(noise_multiplier);
  m["dp.restart_every"] = std::to_string(restart_every);
  m["dp.budget"] = fmt_double(budget);
  std::string ds;
  for (std::size_t i = 0; i < deltas.size(); ++i) ds += (i ? "," : "") + fmt_double(deltas[i]);
  m["dp.deltas"] = ds;
  m["secagg.bits"] = std::to_string(secagg_bits);
  m["secagg.threshold"] = std::to_string(secagg_threshold);
  m["secagg.degree"] = std::to_string(secagg_degree);
  m["secagg.transcript"] = secagg_transcript;
  m["ddp.scale"] = fmt_double(ddp_scale);
  m["ddp.mu"] = fmt_double(ddp_mu);
  m["eval.top_k"] = std::to_string(top_k);
  m["compare.tolerance"] = fmt_double(compare_tolerance);
  m["telemetry.record_wall_time"] = record_wall_time ? "true" : "false";
  m["output.dir"] = output_dir;
  return m;
}

std::string ExperimentConfig::effective_text() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, int> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(t.substr(0, eq));
    const auto value = trim(t.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": duplicate key '" + key +
                                          "' (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    it->second(cfg, key, value);
  }
  if (cfg.corpus_path.empty()) cfg.corpus_path = default_corpus_path();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace fedshield::harness

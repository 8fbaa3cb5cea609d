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

// Python bindings. Experiment results and ledgers cross the boundary as
// plain dicts; vectors as lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>

#include "fedshield/ddp/ddp.hpp"
#include "fedshield/dpftrl/accountant.hpp"
#include "fedshield/error.hpp"
#include "fedshield/harness/config.hpp"
#include "fedshield/harness/experiment.hpp"
#include "fedshield/secagg/keys.hpp"
#include "fedshield/secagg/session.hpp"
#include "fedshield/secagg/shamir.hpp"
#include "fedshield/secagg/topology.hpp"

namespace py = pybind11;
using namespace fedshield;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict metrics_dict(const model::MetricsReport& m) {
  py::dict d;
  d["prediction_accuracy"] = m.prediction_accuracy;
  d["picked_ratio_proxy"] = m.picked_ratio_proxy;
  d["mean_log_loss"] = m.mean_log_loss;
  d["n_eval"] = m.n_eval;
  return d;
}

secagg::Phase parse_phase(const std::string& name) {
  for (auto p : {secagg::Phase::kAdvertise, secagg::Phase::kShareKeys, secagg::Phase::kMaskedInput,
                 secagg::Phase::kUnmask})
    if (secagg::phase_name(p) == name) return p;
  throw Error(ErrorCode::kInvalidArgument, "unknown phase '" + name + "'");
}

ddp::DdpConfig ddp_config(double clip_norm, double scale, unsigned bits, double mu,
                          std::size_t clients) {
  ddp::DdpConfig cfg;
  cfg.clip_norm = clip_norm;
  cfg.scale = scale;
  cfg.field = secagg::FieldSpec::make(bits);
  cfg.mu = mu;
  cfg.clients = clients;
  cfg.validate();
  return cfg;
}

secagg::QuantizedVector wire(const std::vector<std::uint32_t>& values, unsigned bits) {
  const auto field = secagg::FieldSpec::make(bits);
  for (auto v : values)
    if (v > field.mask()) throw Error(ErrorCode::kInvalidArgument, "entry outside [0, 2^bits)");
  return {field, values};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Private federated next-word prediction simulator (native core).";

  py::register_exception<Error>(m, "FedshieldError", PyExc_RuntimeError);

  py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("mode", [](const harness::ExperimentConfig& c) {
        return harness::mode_name(c.mode);
      })
      .def_readwrite("seed", &harness::ExperimentConfig::seed)
      .def_readwrite("output_dir", &harness::ExperimentConfig::output_dir)
      .def_readwrite("record_wall_time", &harness::ExperimentConfig::record_wall_time)
      .def_readonly("rounds", &harness::ExperimentConfig::rounds)
      .def_readonly("users", &harness::ExperimentConfig::users)
      .def_readonly("noise_multiplier", &harness::ExperimentConfig::noise_multiplier)
      .def_readonly("budget", &harness::ExperimentConfig::budget)
      .def("validate", &harness::ExperimentConfig::validate)
      .def("effective_text", &harness::ExperimentConfig::effective_text)
      .def("to_map", &harness::ExperimentConfig::to_map);

  m.def("parse_config", &harness::parse_config, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return harness::load_config(path); },
        py::arg("path"));
  m.def("default_corpus_path", [] { return harness::default_corpus_path(); });

  m.def("account", [](const harness::ExperimentConfig& cfg) {
    return to_python(dpftrl::ledger_to_json(harness::account(cfg)));
  }, py::arg("config"));

  m.def("run_experiment", [](const harness::ExperimentConfig& cfg) {
    harness::ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = harness::run_experiment(cfg);
    }
    py::list rows;
    for (const auto& row : r.metrics) {
      auto d = metrics_dict(row.metrics);
      d["round"] = row.round;
      d["survivors"] = row.survivors;
      d["aborted"] = row.aborted;
      rows.append(d);
    }
    py::dict out;
    out["metrics"] = rows;
    out["ledger"] = to_python(dpftrl::ledger_to_json(r.ledger));
    out["checkpoint"] = r.checkpoint ? py::object(py::str(r.checkpoint->string())) : py::none();
    out["metrics_path"] = r.metrics_path.string();
    out["completed_rounds"] = r.completed_rounds;
    return out;
  }, py::arg("config"));

  m.def("compare", [](const harness::ExperimentConfig& a, const harness::ExperimentConfig& b,
                      const std::string& out_dir) {
    harness::ComparisonReport rep;
    {
      py::gil_scoped_release release;
      rep = harness::compare(a, b, out_dir);
    }
    return to_python(rep.to_json());
  }, py::arg("a"), py::arg("b"), py::arg("out_dir"));

  m.def("account_zcdp", &dpftrl::account_zcdp, py::arg("clip_norm"), py::arg("noise_multiplier"),
        py::arg("horizon"), py::arg("k_max"));
  m.def("zcdp_to_eps", &dpftrl::zcdp_to_eps, py::arg("rho"), py::arg("delta"));
  m.def("tree_height", &dpftrl::tree_height, py::arg("horizon"));
  m.def("max_participations", &dpftrl::max_participations, py::arg("horizon"),
        py::arg("min_separation"));

  m.def("shamir_share", [](std::uint64_t secret, std::size_t n, std::size_t threshold,
                           std::uint64_t seed, std::uint64_t modulus) {
    std::vector<std::pair<std::uint32_t, std::uint64_t>> out;
    for (const auto& s : secagg::shamir_share(secret, n, threshold, seed, secagg::PrimeField(modulus)))
      out.emplace_back(s.holder, s.value);
    return out;
  }, py::arg("secret"), py::arg("n"), py::arg("threshold"), py::arg("seed"),
        py::arg("modulus") = secagg::PrimeField::kMersenne61);

  m.def("shamir_reconstruct", [](const std::vector<std::pair<std::uint32_t, std::uint64_t>>& shares,
                                 std::size_t threshold, std::uint64_t modulus) {
    std::vector<secagg::SecretShare> s;
    for (const auto& [x, y] : shares) s.push_back({x, y, 0, secagg::SecretKind::kSelfMaskSeed});
    return secagg::shamir_reconstruct(s, threshold, secagg::PrimeField(modulus));
  }, py::arg("shares"), py::arg("threshold"), py::arg("modulus") = secagg::PrimeField::kMersenne61);

  m.def("expand_mask", [](const py::bytes& seed, std::size_t dimension, unsigned bits) {
    const std::string raw = seed;
    if (raw.size() != 16) throw Error(ErrorCode::kInvalidArgument, "seed must be 16 bytes");
    secagg::Seed128 s;
    std::memcpy(s.bytes.data(), raw.data(), 16);
    return secagg::expand_mask(s, dimension, secagg::FieldSpec::make(bits)).values;
  }, py::arg("seed"), py::arg("dimension"), py::arg("bits"));

  m.def("secure_sum", [](const std::vector<std::vector<std::uint32_t>>& inputs, unsigned bits,
                         std::size_t threshold, std::size_t degree,
                         const std::map<secagg::ClientId, std::string>& dropouts, std::uint64_t seed) {
    if (inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "no inputs");
    auto cfg = std::make_shared<secagg::SecAggConfig>();
    cfg->field = secagg::FieldSpec::make(bits);
    cfg->dimension = inputs.front().size();
    cfg->threshold = threshold;
    const auto n = inputs.size();
    cfg->graph = degree == 0 || degree + 1 >= n ? secagg::CommGraph::complete(n)
                                                : secagg::build_topology(n, degree, threshold, seed);
    std::vector<secagg::QuantizedVector> qs;
    for (const auto& v : inputs) qs.push_back(wire(v, bits));
    secagg::DropoutSchedule schedule;
    for (const auto& [id, phase] : dropouts) schedule[id] = parse_phase(phase);
    const auto r = secagg::run_secure_aggregation(cfg, qs, schedule, seed);
    py::dict out;
    out["status"] = secagg::phase_name(r.status);
    out["sum"] = r.sum ? py::object(py::cast(r.sum->values)) : py::none();
    out["survivors"] = r.input_survivors;
    out["failure"] = r.failure;
    return out;
  }, py::arg("inputs"), py::arg("bits"), py::arg("threshold"), py::arg("degree") = 0,
        py::arg("dropouts") = std::map<secagg::ClientId, std::string>{}, py::arg("seed") = 0);

  m.def("quantize", [](const std::vector<double>& values, double clip_norm, double scale,
                       unsigned bits, std::uint64_t seed, double mu, std::size_t clients) {
    const auto cfg = ddp_config(clip_norm, scale, bits, mu, clients);
    auto q = ddp::quantize(model::ParameterVector(values), cfg, seed);
    if (mu > 0) q = ddp::add_discrete_noise(q, mu, seed + 1);
    return q.values;
  }, py::arg("values"), py::arg("clip_norm"), py::arg("scale"), py::arg("bits"), py::arg("seed"),
        py::arg("mu") = 0.0, py::arg("clients") = 1);

  m.def("dequantize_sum", [](const std::vector<std::uint32_t>& sum, std::size_t survivors,
                             double clip_norm, double scale, unsigned bits, double mu,
                             std::size_t clients) {
    const auto cfg = ddp_config(clip_norm, scale, bits, mu, clients);
    return ddp::dequantize_sum(wire(sum, bits), survivors, cfg).values();
  }, py::arg("sum"), py::arg("survivors"), py::arg("clip_norm"), py::arg("scale"), py::arg("bits"),
        py::arg("mu") = 0.0, py::arg("clients") = 1);
}

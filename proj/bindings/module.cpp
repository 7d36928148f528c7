#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctmceq/explorer.hpp"
#include "ctmceq/parser.hpp"
#include "ctmceq/pcp.hpp"
#include "ctmceq/simulator.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace ctmceq;

namespace {

RateMode mode_from(const std::string& s) {
  if (s == "unit" || s == "unit_rate") return RateMode::kUnitRate;
  if (s == "embedding" || s == "embedding_weighted")
    return RateMode::kEmbeddingWeighted;
  throw std::invalid_argument("rate mode must be unit_rate or embedding_weighted");
}

std::string compile_model(const std::string& instance_json,
                          const std::string& params_json, bool extended) {
  Encoding enc = compile(PcpInstance::from_json(instance_json),
                         EncodingParams::from_json(params_json), extended);
  return print_model(enc.model);
}

std::string model_summary_json(const std::string& instance_json,
                               const std::string& params_json, bool extended) {
  Encoding enc = compile(PcpInstance::from_json(instance_json),
                         EncodingParams::from_json(params_json), extended);
  nlohmann::json j;
  j["pairs"] = enc.model.pairs.size();
  j["directed_rules"] = 2 * enc.model.pairs.size();
  j["concrete_rules"] = enc.model.rules.size();
  j["warnings"] = enc.warnings;
  return j.dump();
}

std::vector<std::vector<int>> solve_pcp(const std::string& instance_json,
                                        int max_len) {
  return solve_pcp_bounded(PcpInstance::from_json(instance_json), max_len);
}

std::string check_json(const std::string& instance_json,
                       const std::string& params_json, int bound,
                       std::size_t state_cap, const std::string& source,
                       int threads) {
  CheckReport r =
      run_check(PcpInstance::from_json(instance_json),
                EncodingParams::from_json(params_json), bound, state_cap,
                source == "oracle", threads);
  return check_report_to_json(r);
}

std::string petri_experiment_json(double e1, double e2, std::uint64_t events,
                                  std::uint64_t seed, const std::string& mode,
                                  int n_max, int m_max) {
  PetriExperiment ex =
      run_petri_experiment(e1, e2, events, seed, mode_from(mode), n_max, m_max);
  nlohmann::json j;
  j["tv"] = ex.tv;
  j["truncated_mass"] = ex.predicted.truncated_mass;
  j["max_flux_asymmetry_top10"] = ex.max_asymmetry_top10;
  j["events"] = ex.trajectory.events;
  j["total_time"] = ex.trajectory.total_time;
  return j.dump();
}

std::string petri_closed_form_json(double e1, double e2, int n_max,
                                   int m_max) {
  PetriDistribution d = petri_closed_form(e1, e2, n_max, m_max);
  nlohmann::json j;
  j["p"] = d.p;
  j["z"] = d.z;
  j["truncated_mass"] = d.truncated_mass;
  return j.dump();
}

std::string simulate_model_json(const std::string& model_text,
                                const std::string& init_name,
                                std::uint64_t events, double time_budget,
                                std::uint64_t seed, const std::string& mode) {
  Model m = parse_model(model_text);
  if (!m.inits.count(init_name))
    throw std::invalid_argument("model has no %init named '" + init_name + "'");
  SsaOptions opts;
  opts.seed = seed;
  opts.max_events = events;
  opts.max_time = time_budget;
  opts.mode = mode_from(mode);
  Trajectory t = ssa_run(m.inits.at(init_name), m.rules, opts);
  nlohmann::json j;
  j["events"] = t.events;
  j["total_time"] = t.total_time;
  j["deadlock"] = t.deadlock;
  j["occupancy"] = t.occupancy;
  return j.dump();
}

std::string solve_energy_json(const std::string& rate_graph_json, double tol) {
  RateGraph g = rate_graph_from_json(rate_graph_json);
  SolveResult res = solve_energy(g, {}, tol);
  nlohmann::json j;
  if (std::holds_alternative<EnergyAssignment>(res)) {
    const auto& e = std::get<EnergyAssignment>(res);
    j["kind"] = "assignment";
    nlohmann::json energy;
    for (int s = 0; s < g.num_states(); ++s) energy[g.key_of(s)] = e.energy[s];
    j["energy"] = energy;
    j["components"] = e.num_components;
  } else {
    const auto& w = std::get<CycleWitness>(res);
    j["kind"] = "witness";
    j["energy_sum"] = w.energy_sum;
    auto& path = j["path"] = nlohmann::json::array();
    for (const CycleEdge& ce : w.path)
      path.push_back({{"from", g.key_of(ce.from)}, {"to", g.key_of(ce.to)}});
  }
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_ctmceq, m) {
  m.doc() =
      "core bindings: correspondence-instance compiler, bounded "
      "equilibrium checking, closed forms and stochastic simulation";

  m.def("compile_model", &compile_model, py::arg("instance_json"),
        py::arg("params_json"), py::arg("extended") = true,
        "compile an instance into the model language");
  m.def("model_summary_json", &model_summary_json, py::arg("instance_json"),
        py::arg("params_json"), py::arg("extended") = true);
  m.def("solve_pcp", &solve_pcp, py::arg("instance_json"),
        py::arg("max_len") = 3,
        "all index sequences up to max_len whose concatenations agree");
  m.def("check_json", &check_json, py::arg("instance_json"),
        py::arg("params_json"), py::arg("bound") = 4,
        py::arg("state_cap") = 1000000, py::arg("source") = "encoding",
        py::arg("threads") = 1,
        "bounded equilibrium check with census and partition report");
  m.def("petri_experiment_json", &petri_experiment_json, py::arg("e1"),
        py::arg("e2"), py::arg("events"), py::arg("seed") = 0,
        py::arg("rate_mode") = "unit_rate", py::arg("n_max") = 10,
        py::arg("m_max") = 10);
  m.def("petri_closed_form_json", &petri_closed_form_json, py::arg("e1"),
        py::arg("e2"), py::arg("n_max") = 10, py::arg("m_max") = 10);
  m.def("simulate_model_json", &simulate_model_json, py::arg("model_text"),
        py::arg("init") = "start", py::arg("events") = 0,
        py::arg("time") = 0.0, py::arg("seed") = 0,
        py::arg("rate_mode") = "unit_rate");
  m.def("solve_energy_json", &solve_energy_json, py::arg("rate_graph_json"),
        py::arg("tol") = 1e-9,
        "energy assignment or violating-cycle witness for a rate graph");
}

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ctmceq/errors.hpp"
#include "ctmceq/explorer.hpp"
#include "ctmceq/parser.hpp"
#include "ctmceq/pcp.hpp"
#include "ctmceq/simulator.hpp"
#include "json.hpp"

namespace {

using namespace ctmceq;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text << '\n';
  else
    spill(path, text);
}

RateMode parse_mode(const std::string& s) {
  if (s == "unit" || s == "unit_rate") return RateMode::kUnitRate;
  if (s == "embedding" || s == "embedding_weighted")
    return RateMode::kEmbeddingWeighted;
  throw CLI::ValidationError("--rate-mode",
                             "expected unit_rate or embedding_weighted");
}

struct CommonArgs {
  std::string instance_path, params_path, output;
  int bound = 4;
  std::size_t state_cap = 1000000;
  int threads = 1;
};

PcpInstance load_instance(const std::string& path) {
  return PcpInstance::from_json(slurp(path));
}

EncodingParams load_params(const std::string& path) {
  return EncodingParams::from_json(slurp(path));
}

nlohmann::json trajectory_json(const Trajectory& t, RateMode mode) {
  nlohmann::json j;
  j["seed"] = t.seed;
  j["events"] = t.events;
  j["total_time"] = t.total_time;
  j["deadlock"] = t.deadlock;
  j["flagged_hits"] = t.flagged_hits;
  j["distinct_states"] = t.occupancy.size();
  j["rate_mode"] =
      mode == RateMode::kUnitRate ? "unit_rate" : "embedding_weighted";
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [k, w] : t.occupancy) ranked.push_back({w, k});
  std::sort(ranked.rbegin(), ranked.rend());
  auto& top = j["top_states"] = nlohmann::json::array();
  for (std::size_t k = 0; k < ranked.size() && k < 20; ++k) {
    auto visits = t.visits.find(ranked[k].second);
    top.push_back(
        {{"state", ranked[k].second},
         {"occupancy",
          t.total_time > 0 ? ranked[k].first / t.total_time : 0.0},
         {"visits", visits == t.visits.end() ? 0 : visits->second}});
  }
  return j;
}

std::string occupancy_csv(const Trajectory& t) {
  std::ostringstream os;
  os << "state,residence_time,visits\n";
  for (const auto& [k, w] : t.occupancy) {
    auto visits = t.visits.find(k);
    os << '"' << k << "\"," << w << ','
       << (visits == t.visits.end() ? 0 : visits->second) << '\n';
  }
  return os.str();
}

int cmd_compile(const CommonArgs& a, bool extended) {
  PcpInstance x = load_instance(a.instance_path);
  EncodingParams p = load_params(a.params_path);
  Encoding enc = compile(x, p, extended);
  write_output(a.output, print_model(enc.model));
  int variants = static_cast<int>(enc.model.rules.size());
  std::cout << "compiled " << enc.model.pairs.size() << " reversible pairs ("
            << 2 * enc.model.pairs.size() << " directed rules, " << variants
            << " concrete variants)\n";
  for (const auto& w : enc.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_solve_pcp(const CommonArgs& a, int max_len) {
  PcpInstance x = load_instance(a.instance_path);
  auto sols = solve_pcp_bounded(x, max_len);
  nlohmann::json j;
  j["max_len"] = max_len;
  j["count"] = sols.size();
  j["solutions"] = sols;
  write_output(a.output, j.dump(2));
  std::cout << sols.size() << " solution(s) up to length " << max_len << '\n';
  for (const auto& f : sols) {
    std::cout << " ";
    for (int i : f) std::cout << ' ' << i;
    std::cout << '\n';
  }
  return 0;
}

int cmd_explore(const CommonArgs& a, bool extended, bool use_oracle,
                const std::string& dot_path, const std::string& csv_path) {
  PcpInstance x = load_instance(a.instance_path);
  EncodingParams p = load_params(a.params_path);
  ExploreConfig cfg;
  cfg.bound = a.bound;
  cfg.state_cap = a.state_cap;
  cfg.threads = a.threads;

  TruncatedChain chain;
  Encoding enc = compile(x, p, extended);
  if (use_oracle) {
    OracleSpace space(x, p, extended);
    chain = explore(space, cfg);
  } else {
    EncodingSpace space(enc);
    chain = explore(space, cfg);
  }
  LevelCensus census = level_census(chain, x.size());

  nlohmann::json j;
  j["bound"] = a.bound;
  j["extended"] = extended;
  j["source"] = use_oracle ? "oracle" : "encoding";
  j["states"] = chain.graph.num_states();
  j["edges"] = chain.graph.num_edges();
  j["capped"] = chain.capped;
  j["frontier"] = chain.frontier.size();
  j["success_states"] = chain.success_states.size();
  auto& review = j["review_states"] = nlohmann::json::array();
  for (int id : chain.review_states) review.push_back(chain.graph.key_of(id));
  for (const auto& [n, c] : census.counts)
    j["census"]["counts"][std::to_string(n)] = c;
  for (const auto& [n, b] : census.bounds)
    j["census"]["bounds"][std::to_string(n)] = b;
  j["census"]["exceeded_levels"] = census.exceeded;
  write_output(a.output, j.dump(2));
  if (!dot_path.empty()) spill(dot_path, chain_to_dot(chain));
  if (!csv_path.empty()) spill(csv_path, census_to_csv(census));
  std::cout << "explored " << chain.graph.num_states() << " states, "
            << chain.graph.num_edges() << " directed edges (bound " << a.bound
            << (chain.capped ? ", CAPPED" : "") << ")\n";
  return 0;
}

int cmd_check(const CommonArgs& a, bool use_oracle,
              const std::string& dot_path) {
  PcpInstance x = load_instance(a.instance_path);
  EncodingParams p = load_params(a.params_path);
  CheckReport r = run_check(x, p, a.bound, a.state_cap, use_oracle, a.threads);
  write_output(a.output, check_report_to_json(r));
  if (!dot_path.empty()) spill(dot_path, chain_to_dot(r.chain));
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (r.equilibrium.violation)
    std::cout << "verdict: violation (cycle energy "
              << r.equilibrium.witness.energy_sum << ", second switch "
              << (r.equilibrium.traverses_switch2 ? "traversed" : "avoided")
              << ")\n";
  else
    std::cout << "verdict: energy assignment exists on the truncation\n";
  std::cout << "partition: " << r.partition.verdict << '\n';
  return 0;
}

int cmd_simulate(const CommonArgs& a, const std::string& model_path,
                 const std::string& init_name, bool extended,
                 std::uint64_t events, double time_budget, std::uint64_t seed,
                 RateMode mode, bool stop_on_success,
                 const std::string& csv_path) {
  SsaOptions opts;
  opts.seed = seed;
  opts.max_events = events;
  opts.max_time = time_budget;
  opts.mode = mode;
  opts.track_flux = false;
  opts.stop_when_flagged = stop_on_success;

  Trajectory traj;
  if (!model_path.empty()) {
    Model m = parse_model(slurp(model_path));
    if (!m.inits.count(init_name))
      throw std::runtime_error("model has no %init named '" + init_name + "'");
    traj = ssa_run(m.inits.at(init_name), m.rules, opts);
  } else {
    PcpInstance x = load_instance(a.instance_path);
    EncodingParams p = load_params(a.params_path);
    Encoding enc = compile(x, p, extended);
    EncodingIds ids = encoding_ids(*enc.model.sigs);
    traj = ssa_run(enc.initial(), enc.model.rules, opts, nullptr,
                   [ids](const SiteGraph& g) {
                     return graph_is_success(g, ids);
                   });
  }
  write_output(a.output, trajectory_json(traj, mode).dump(2));
  if (!csv_path.empty()) spill(csv_path, occupancy_csv(traj));
  std::cout << traj.events << " events over " << traj.total_time
            << " time units, " << traj.occupancy.size() << " distinct states"
            << (traj.deadlock ? ", deadlocked" : "") << '\n';
  if (traj.flagged_hits)
    std::cout << "success states visited " << traj.flagged_hits << " time(s)\n";
  return 0;
}

int cmd_petri(double e1, double e2, std::uint64_t events, std::uint64_t seed,
              RateMode mode, int n_max, int m_max, const std::string& output,
              const std::string& csv_path) {
  PetriExperiment ex = run_petri_experiment(e1, e2, events, seed, mode, n_max, m_max);
  nlohmann::json j;
  j["e1"] = e1;
  j["e2"] = e2;
  j["events"] = events;
  j["seed"] = seed;
  j["rate_mode"] =
      mode == RateMode::kUnitRate ? "unit_rate" : "embedding_weighted";
  j["tv"] = ex.tv;
  j["truncated_mass"] = ex.predicted.truncated_mass;
  j["closed_form_p00"] = ex.predicted.p.at("0,0");
  j["max_flux_asymmetry_top10"] = ex.max_asymmetry_top10;
  auto& edges = j["top_edges"] = nlohmann::json::array();
  for (const auto& fe : ex.top_edges)
    edges.push_back({{"a", fe.a},
                     {"b", fe.b},
                     {"forward", fe.forward},
                     {"backward", fe.backward},
                     {"asymmetry", fe.asymmetry}});
  write_output(output, j.dump(2));
  if (!csv_path.empty()) spill(csv_path, occupancy_csv(ex.trajectory));
  std::cout << "tv distance " << ex.tv << ", top-10 flux asymmetry "
            << ex.max_asymmetry_top10 << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ctmceq: correspondence-instance compiler, bounded equilibrium "
      "checker and stochastic simulator for reversible site-graph "
      "rewriting systems"};
  app.require_subcommand(1);

  CommonArgs common;
  bool extended = false;
  bool use_oracle = false;
  int max_len = 3;
  std::string dot_path, csv_path, model_path, init_name = "start";
  std::uint64_t events = 0, seed = 0;
  double time_budget = 0.0;
  std::string mode_name = "unit_rate";
  bool stop_on_success = false;
  double e1 = 1.0, e2 = 0.5;
  int n_max = 10, m_max = 10;

  auto* c_compile = app.add_subcommand("compile", "emit the rewriting system");
  c_compile->add_option("--instance", common.instance_path, "instance JSON file")->required();
  c_compile->add_option("--params", common.params_path, "encoding parameters JSON file")->required();
  c_compile->add_flag("--extended", extended,
                      "include the erase and second-switch rules");
  c_compile->add_option("-o,--output", common.output, "model file to write (stdout when omitted)");

  auto* c_solve = app.add_subcommand("solve-pcp", "bounded brute-force search");
  c_solve->add_option("--instance", common.instance_path, "instance JSON file")->required();
  c_solve->add_option("--max-len", max_len, "longest index sequence to try")->check(CLI::NonNegativeNumber);
  c_solve->add_option("-o,--output", common.output, "solutions JSON");

  auto* c_explore = app.add_subcommand("explore", "bounded state space");
  c_explore->add_option("--instance", common.instance_path, "instance JSON file")->required();
  c_explore->add_option("--params", common.params_path, "encoding parameters JSON file")->required();
  c_explore->add_option("--bound", common.bound, "max recorded-index count per state")->check(CLI::NonNegativeNumber);
  c_explore->add_option("--state-cap", common.state_cap, "memory guard on the state count");
  c_explore->add_option("--threads", common.threads, "parallel frontier expansion")->check(CLI::PositiveNumber);
  c_explore->add_flag("--extended,!--plain", extended)->default_val(true);
  c_explore->add_option("--source", use_oracle)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, bool>{{"encoding", false}, {"oracle", true}}));
  c_explore->add_option("-o,--output", common.output);
  c_explore->add_option("--dot", dot_path);
  c_explore->add_option("--csv", csv_path);

  auto* c_check = app.add_subcommand(
      "check", "decide equilibrium on the truncation; census and partition");
  c_check->add_option("--instance", common.instance_path, "instance JSON file")->required();
  c_check->add_option("--params", common.params_path, "encoding parameters JSON file")->required();
  c_check->add_option("--bound", common.bound, "max recorded-index count per state")->check(CLI::NonNegativeNumber);
  c_check->add_option("--state-cap", common.state_cap, "memory guard on the state count");
  c_check->add_option("--threads", common.threads, "parallel frontier expansion")->check(CLI::PositiveNumber);
  c_check->add_option("--source", use_oracle)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, bool>{{"encoding", false}, {"oracle", true}}));
  c_check->add_option("-o,--output", common.output);
  c_check->add_option("--dot", dot_path);

  auto* c_sim = app.add_subcommand("simulate", "stochastic simulation");
  c_sim->add_option("--model", model_path, "model file to simulate (otherwise --instance/--params)");
  c_sim->add_option("--init", init_name);
  c_sim->add_option("--instance", common.instance_path);
  c_sim->add_option("--params", common.params_path);
  c_sim->add_flag("--extended,!--plain", extended)->default_val(true);
  c_sim->add_option("--events", events, "event budget");
  c_sim->add_option("--time", time_budget, "time budget");
  c_sim->add_option("--seed", seed);
  c_sim->add_option("--rate-mode", mode_name, "unit_rate or embedding_weighted");
  c_sim->add_flag("--stop-on-success", stop_on_success);
  c_sim->add_option("-o,--output", common.output);
  c_sim->add_option("--occupancy-csv", csv_path);

  auto* c_petri = app.add_subcommand(
      "petri", "built-in birth/flip example against its closed form");
  c_petri->add_option("--e1", e1, "creation energy difference for A");
  c_petri->add_option("--e2", e2, "flip energy difference A to B");
  c_petri->add_option("--events", events, "event budget")->required();
  c_petri->add_option("--seed", seed);
  c_petri->add_option("--rate-mode", mode_name);
  c_petri->add_option("--nmax", n_max);
  c_petri->add_option("--mmax", m_max);
  c_petri->add_option("-o,--output", common.output);
  c_petri->add_option("--occupancy-csv", csv_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_compile)) return cmd_compile(common, extended);
    if (app.got_subcommand(c_solve)) return cmd_solve_pcp(common, max_len);
    if (app.got_subcommand(c_explore))
      return cmd_explore(common, extended, use_oracle, dot_path, csv_path);
    if (app.got_subcommand(c_check))
      return cmd_check(common, use_oracle, dot_path);
    if (app.got_subcommand(c_sim)) {
      if (model_path.empty() &&
          (common.instance_path.empty() || common.params_path.empty()))
        throw std::runtime_error(
            "simulate needs either --model or --instance with --params");
      return cmd_simulate(common, model_path, init_name, extended, events,
                          time_budget, seed, parse_mode(mode_name),
                          stop_on_success, csv_path);
    }
    if (app.got_subcommand(c_petri))
      return cmd_petri(e1, e2, events, seed, parse_mode(mode_name), n_max,
                       m_max, common.output, csv_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

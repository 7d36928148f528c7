#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctmceq/explorer.hpp"
#include "json.hpp"

namespace ctmceq {

namespace {

nlohmann::json witness_json(const TruncatedChain& t, const CycleWitness& w) {
  nlohmann::json j;
  j["energy_sum"] = w.energy_sum;
  auto& path = j["path"] = nlohmann::json::array();
  for (const CycleEdge& e : w.path) {
    nlohmann::json edge;
    edge["from"] = t.graph.key_of(e.from);
    edge["to"] = t.graph.key_of(e.to);
    edge["delta_e"] = edge_delta_e(t.graph, e.from, e.to);
    auto it = t.edge_contribs.find({e.from, e.to});
    auto& labels = edge["labels"] = nlohmann::json::array();
    if (it != t.edge_contribs.end())
      for (const auto& [label, rate] : it->second) {
        (void)rate;
        labels.push_back(label);
      }
    path.push_back(edge);
  }
  return j;
}

}  // namespace

std::string check_report_to_json(const CheckReport& r) {
  nlohmann::json j;
  j["instance"] = nlohmann::json::parse(r.instance.to_json());
  j["params"] = nlohmann::json::parse(r.params.to_json());
  j["bound"] = r.bound;
  j["source"] = r.source;
  j["warnings"] = r.warnings;

  auto& chain = j["chain"];
  chain["states"] = r.chain.graph.num_states();
  chain["edges"] = r.chain.graph.num_edges();
  chain["capped"] = r.chain.capped;
  chain["frontier"] = r.chain.frontier.size();
  chain["success_states"] = r.chain.success_states.size();
  auto& review = chain["review_states"] = nlohmann::json::array();
  for (int id : r.chain.review_states) review.push_back(r.chain.graph.key_of(id));

  if (r.equilibrium.violation) {
    j["verdict"] = "violation";
    j["witness"] = witness_json(r.chain, r.equilibrium.witness);
    j["witness"]["traverses_switch2"] = r.equilibrium.traverses_switch2;
  } else {
    j["verdict"] = "energy";
    auto& energy = j["energy"];
    energy["components"] = r.equilibrium.assignment.num_components;
    // State-function view: per-state energy against the level value.
    double max_dev = 0.0;
    const auto& ea = r.equilibrium.assignment;
    if (!ea.energy.empty()) {
      double align = ea.energy[0] - r.params.epsilon * r.chain.n_value[0];
      for (std::size_t s = 0; s < ea.energy.size(); ++s)
        max_dev = std::max(
            max_dev, std::abs(ea.energy[s] - r.params.epsilon * r.chain.n_value[s] -
                              align));
    }
    energy["max_state_function_deviation"] = max_dev;
  }
  j["note"] = r.equilibrium.note;
  j["bounded_statement"] =
      "all statements are relative to the depth-" + std::to_string(r.bound) +
      " truncation; the bound is a user choice, not derived";

  auto& census = j["census"];
  for (const auto& [n, c] : r.census.counts)
    census["counts"][std::to_string(n)] = c;
  for (const auto& [n, b] : r.census.bounds)
    census["bounds"][std::to_string(n)] = b;
  census["exceeded_levels"] = r.census.exceeded;

  auto& part = j["partition"];
  part["partial_sums"] = r.partition.partial_sums;
  if (std::isfinite(r.partition.tail_bound))
    part["tail_bound"] = r.partition.tail_bound;
  else
    part["tail_bound"] = "infinite";
  part["verdict"] = r.partition.verdict;
  return j.dump(2);
}

std::string chain_to_dot(const TruncatedChain& t) {
  std::ostringstream os;
  os << "digraph truncated_chain {\n";
  for (int s = 0; s < t.graph.num_states(); ++s)
    os << "  n" << s << " [label=\"" << s << " (n=" << t.n_value[s]
       << ")\" tooltip=\"" << t.graph.key_of(s) << "\"];\n";
  for (const auto& [e, q] : t.graph.edges()) {
    os << "  n" << e.first << " -> n" << e.second << " [label=\"q=" << q
       << " dE=" << edge_delta_e(t.graph, e.first, e.second) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string census_to_csv(const LevelCensus& c) {
  std::ostringstream os;
  os << "n,count,bound,exceeded\n";
  for (const auto& [n, count] : c.counts) {
    bool ex = std::find(c.exceeded.begin(), c.exceeded.end(), n) !=
              c.exceeded.end();
    os << n << ',' << count << ',' << c.bounds.at(n) << ',' << (ex ? 1 : 0)
       << '\n';
  }
  return os.str();
}

}  // namespace ctmceq

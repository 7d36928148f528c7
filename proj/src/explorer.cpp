#include "ctmceq/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "ctmceq/errors.hpp"

namespace ctmceq {

EncodingSpace::EncodingSpace(const Encoding& enc)
    : enc_(enc), ids_(encoding_ids(*enc.model.sigs)) {}

std::string EncodingSpace::initial_key() {
  const SiteGraph& g = enc_.initial();
  std::string key = canonical_key(g);
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(key, g);
  return key;
}

ExpandedState EncodingSpace::expand(const std::string& key) {
  SiteGraph g;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it == memo_.end())
      throw ValidationError("expand of a state that was never materialized");
    g = it->second;
  }
  ExpandedState out;
  out.n_value = count_real_indices(g, ids_);
  out.success = graph_is_success(g, ids_);
  out.empty_chain_above_dummy = graph_empty_chain_above_dummy(g, ids_);
  for (const DirectedRule& r : enc_.model.rules) {
    for (const Embedding& e : find_embeddings(r.lhs, g)) {
      SiteGraph succ = apply_rule(r, e, g);
      LabeledTransition t;
      t.label = r.label;
      t.forward = r.forward;
      t.rate = r.rate;
      t.delta_e = r.delta_e;
      t.succ_key = canonical_key(succ);
      t.succ_n = count_real_indices(succ, ids_);
      {
        std::lock_guard<std::mutex> lock(mu_);
        memo_.emplace(t.succ_key, std::move(succ));
      }
      out.out.push_back(std::move(t));
    }
  }
  return out;
}

OracleSpace::OracleSpace(const PcpInstance& x, const EncodingParams& p,
                         bool extended)
    : x_(x), p_(p), extended_(extended) {}

std::string OracleSpace::initial_key() {
  AbstractState s = abstract_initial();
  std::string key = abstract_key(s);
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(key, s);
  return key;
}

ExpandedState OracleSpace::expand(const std::string& key) {
  AbstractState s;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it == memo_.end())
      throw ValidationError("expand of a state that was never materialized");
    s = it->second;
  }
  ExpandedState out;
  out.n_value = static_cast<int>(s.log.size());
  out.success = is_success(s);
  out.empty_chain_above_dummy = s.mode == AbstractState::Mode::kBackward &&
                                s.chain.empty() && s.pos > 0;
  for (OracleTransition& tr : oracle_transitions(s, x_, p_, extended_)) {
    LabeledTransition t;
    t.label = tr.label;
    t.forward = tr.forward;
    t.rate = tr.rate;
    t.delta_e = tr.delta_e;
    t.succ_key = abstract_key(tr.succ);
    t.succ_n = static_cast<int>(tr.succ.log.size());
    {
      std::lock_guard<std::mutex> lock(mu_);
      memo_.emplace(t.succ_key, std::move(tr.succ));
    }
    out.out.push_back(std::move(t));
  }
  return out;
}

TruncatedChain explore(StateSpace& space, const ExploreConfig& cfg) {
  TruncatedChain t;
  t.bound = cfg.bound;

  std::vector<ExpandedState> expanded;
  std::vector<char> done;
  std::vector<int> level;  // ids awaiting expansion
  std::map<std::string, bool> frontier_seen;

  std::string init = space.initial_key();
  t.graph.add_state(init);
  level.push_back(0);

  while (!level.empty() && !t.capped) {
    // Expand the whole level (in parallel when asked), then merge in
    // level order so ids never depend on scheduling.
    std::vector<ExpandedState> results(level.size());
    if (cfg.threads > 1 && level.size() > 1) {
      std::vector<std::thread> workers;
      std::size_t chunk =
          (level.size() + cfg.threads - 1) / static_cast<std::size_t>(cfg.threads);
      for (int w = 0; w < cfg.threads; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(level.size(), lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
          for (std::size_t k = lo; k < hi; ++k)
            results[k] = space.expand(t.graph.key_of(level[k]));
        });
      }
      for (auto& w : workers) w.join();
    } else {
      for (std::size_t k = 0; k < level.size(); ++k)
        results[k] = space.expand(t.graph.key_of(level[k]));
    }

    std::vector<int> next;
    for (std::size_t k = 0; k < level.size(); ++k) {
      int id = level[k];
      if (static_cast<std::size_t>(id) >= expanded.size()) {
        expanded.resize(id + 1);
        done.resize(id + 1, 0);
      }
      expanded[id] = std::move(results[k]);
      done[id] = 1;
      for (const LabeledTransition& tr : expanded[id].out) {
        if (!tr.forward) continue;
        if (tr.succ_n > cfg.bound) {
          if (!frontier_seen[tr.succ_key]) {
            frontier_seen[tr.succ_key] = true;
            t.frontier.push_back(tr.succ_key);
          }
          continue;
        }
        if (t.graph.state_id(tr.succ_key) >= 0) continue;
        if (static_cast<std::size_t>(t.graph.num_states()) >= cfg.state_cap) {
          t.capped = true;
          break;
        }
        int nid = t.graph.add_state(tr.succ_key);
        next.push_back(nid);
      }
      if (t.capped) break;
    }
    level = std::move(next);
  }

  // Discovered-but-unexpanded states (cap hit, or tail of the last
  // level) still need their n-values and their edge contributions.
  int n_states = t.graph.num_states();
  expanded.resize(n_states);
  done.resize(n_states, 0);
  for (int id = 0; id < n_states; ++id)
    if (!done[id]) expanded[id] = space.expand(t.graph.key_of(id));

  t.n_value.resize(n_states);
  for (int id = 0; id < n_states; ++id) {
    t.n_value[id] = expanded[id].n_value;
    if (expanded[id].success) t.success_states.push_back(id);
    if (expanded[id].empty_chain_above_dummy) t.review_states.push_back(id);
  }

  // Both edge directions between included states; the reverse rule of
  // every transition exists, so support stays symmetric.
  for (int id = 0; id < n_states; ++id)
    for (const LabeledTransition& tr : expanded[id].out) {
      int sid = t.graph.state_id(tr.succ_key);
      if (sid < 0) continue;
      t.graph.add_rate(id, sid, tr.rate);
      t.edge_contribs[{id, sid}].push_back({tr.label, tr.rate});
    }
  return t;
}

EquilibriumReport check_equilibrium(const TruncatedChain& t, double tol) {
  EquilibriumReport r;
  SolveResult res = solve_energy(t.graph, {}, tol);
  if (std::holds_alternative<EnergyAssignment>(res)) {
    r.violation = false;
    r.assignment = std::get<EnergyAssignment>(res);
    r.note =
        "no violated cycle within the bound; conclusive only for cycles "
        "inside the truncation";
    return r;
  }
  r.violation = true;
  r.witness = std::get<CycleWitness>(res);
  if (r.witness.energy_sum < 0) {
    // Report the forward orientation of the cycle.
    std::vector<CycleEdge> rev;
    for (auto it = r.witness.path.rbegin(); it != r.witness.path.rend(); ++it)
      rev.push_back({it->to, it->from});
    r.witness.path = std::move(rev);
    r.witness.energy_sum = path_delta_e(t.graph, r.witness.path);
  }
  for (const CycleEdge& e : r.witness.path) {
    auto it = t.edge_contribs.find({e.from, e.to});
    if (it == t.edge_contribs.end()) continue;
    for (const auto& [label, rate] : it->second) {
      (void)rate;
      if (label.rfind("switch2", 0) == 0) r.traverses_switch2 = true;
    }
  }
  r.note =
      "a violation inside the truncation is a violation of the full chain";
  return r;
}

LevelCensus level_census(const TruncatedChain& t, int n_pairs) {
  LevelCensus c;
  for (int n : t.n_value) c.counts[n] += 1;
  for (int n = 0; n <= t.bound; ++n) {
    if (!c.counts.count(n)) c.counts[n] = 0;
    c.bounds[n] = (n + 1) * std::pow(static_cast<double>(n_pairs), n);
  }
  for (const auto& [n, count] : c.counts)
    if (static_cast<double>(count) > c.bounds.at(n)) c.exceeded.push_back(n);
  return c;
}

PartitionReport partition_sum(const LevelCensus& census, int bound,
                              double epsilon, int n_pairs,
                              bool violation_found) {
  PartitionReport r;
  double running = 0.0;
  for (int n = 0; n <= bound; ++n) {
    auto it = census.counts.find(n);
    double cnt = it == census.counts.end() ? 0.0 : static_cast<double>(it->second);
    running += cnt * std::exp(-epsilon * n);
    r.partial_sums.push_back(running);
  }
  double ratio = n_pairs * std::exp(-epsilon);
  if (ratio < 1.0) {
    // Tail of sum_{n>N} (n+1) r^n in closed form.
    double rp = std::pow(ratio, bound + 1);
    r.tail_bound =
        ((bound + 2) * rp - (bound + 1) * rp * ratio) / ((1 - ratio) * (1 - ratio));
  } else {
    r.tail_bound = std::numeric_limits<double>::infinity();
  }
  if (violation_found)
    r.verdict = "violation-found";
  else if (ratio < 1.0)
    r.verdict = "converges";
  else
    r.verdict = "divergence-suspected";
  return r;
}

CheckReport run_check(const PcpInstance& x, const EncodingParams& p, int bound,
                      std::size_t state_cap, bool use_oracle, int threads) {
  CheckReport r;
  r.instance = x;
  r.params = p;
  r.bound = bound;
  r.source = use_oracle ? "oracle" : "encoding";

  ExploreConfig cfg;
  cfg.bound = bound;
  cfg.state_cap = state_cap;
  cfg.threads = threads;

  Encoding enc = compile(x, p, /*extended=*/true);
  r.warnings = enc.warnings;
  if (use_oracle) {
    OracleSpace space(x, p, true);
    r.chain = explore(space, cfg);
  } else {
    EncodingSpace space(enc);
    r.chain = explore(space, cfg);
  }
  r.equilibrium = check_equilibrium(r.chain);
  r.census = level_census(r.chain, x.size());
  r.partition = partition_sum(r.census, bound, p.epsilon, x.size(),
                              r.equilibrium.violation);
  return r;
}

}  // namespace ctmceq

#include "ctmceq/rate_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ctmceq/errors.hpp"
#include "json.hpp"

namespace ctmceq {

int RateGraph::add_state(const std::string& key) {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(states_.size());
  states_.push_back(key);
  index_.emplace(key, id);
  return id;
}

int RateGraph::state_id(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

void RateGraph::add_rate(int from, int to, double rate) {
  if (from == to)
    throw ValidationError("self-loop edge (" + std::to_string(from) +
                          ") rejected: carries no equilibrium information");
  if (!(rate > 0.0))
    throw ValidationError("rates must be strictly positive");
  if (from < 0 || to < 0 || from >= num_states() || to >= num_states())
    throw ValidationError("edge endpoint out of range");
  edges_[{from, to}] += rate;
}

bool RateGraph::has_edge(int from, int to) const {
  return edges_.count({from, to}) > 0;
}

double RateGraph::rate(int from, int to) const {
  auto it = edges_.find({from, to});
  return it == edges_.end() ? 0.0 : it->second;
}

std::optional<std::pair<int, int>> check_symmetric_support(const RateGraph& g) {
  for (const auto& [e, q] : g.edges()) {
    (void)q;
    if (!g.has_edge(e.second, e.first)) return e;
  }
  return std::nullopt;
}

double edge_delta_e(const RateGraph& g, int i, int j) {
  double qij = g.rate(i, j);
  double qji = g.rate(j, i);
  if (qij <= 0.0 || qji <= 0.0)
    throw ApplyError("edge_delta_e: edge (" + std::to_string(i) + "," +
                     std::to_string(j) + ") missing in one direction");
  // Log-space throughout; never multiply rate products along paths.
  return std::log(qji) - std::log(qij);
}

double path_delta_e(const RateGraph& g, const std::vector<CycleEdge>& path) {
  double sum = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k > 0 && path[k - 1].to != path[k].from)
      throw ApplyError("path_delta_e: path not contiguous at step " +
                       std::to_string(k));
    sum += edge_delta_e(g, path[k].from, path[k].to);
  }
  return sum;
}

SpanningForest spanning_forest(const RateGraph& g) {
  int n = g.num_states();
  SpanningForest f;
  f.parent.assign(n, -1);
  f.depth.assign(n, 0);
  f.component.assign(n, -1);

  // Undirected adjacency in ascending neighbour order.
  std::vector<std::vector<int>> adj(n);
  for (const auto& [e, q] : g.edges()) {
    (void)q;
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<int> queue;
  for (int s = 0; s < n; ++s) {
    if (f.component[s] >= 0) continue;
    int comp = static_cast<int>(f.roots.size());
    f.roots.push_back(s);
    f.component[s] = comp;
    queue.clear();
    queue.push_back(s);
    f.bfs_order.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (int v : adj[u]) {
        if (f.component[v] >= 0) continue;
        f.component[v] = comp;
        f.parent[v] = u;
        f.depth[v] = f.depth[u] + 1;
        queue.push_back(v);
        f.bfs_order.push_back(v);
      }
    }
  }
  return f;
}

namespace {

// Tree path from a to b (edges of g, both directions exist under
// symmetric support): climb to the lowest common ancestor.
std::vector<CycleEdge> tree_path(const SpanningForest& f, int a, int b) {
  std::vector<CycleEdge> up;    // a -> lca
  std::vector<CycleEdge> down;  // lca -> b, built backwards
  int x = a, y = b;
  while (f.depth[x] > f.depth[y]) {
    up.push_back({x, f.parent[x]});
    x = f.parent[x];
  }
  while (f.depth[y] > f.depth[x]) {
    down.push_back({f.parent[y], y});
    y = f.parent[y];
  }
  while (x != y) {
    up.push_back({x, f.parent[x]});
    x = f.parent[x];
    down.push_back({f.parent[y], y});
    y = f.parent[y];
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

}  // namespace

SolveResult solve_energy(const RateGraph& g, const std::map<int, double>& pins,
                         double tol) {
  if (auto bad = check_symmetric_support(g))
    throw SupportError(bad->first, bad->second,
                       "asymmetric support: edge (" +
                           std::to_string(bad->first) + "," +
                           std::to_string(bad->second) + ") has no reverse");

  SpanningForest f = spanning_forest(g);
  int n = g.num_states();
  EnergyAssignment out;
  out.energy.assign(n, 0.0);
  out.component = f.component;
  out.num_components = static_cast<int>(f.roots.size());
  out.reference = f.roots;

  // Energies by summing edge steps along tree paths from the roots.
  for (int s : f.bfs_order) {
    if (f.parent[s] >= 0)
      out.energy[s] = out.energy[f.parent[s]] + edge_delta_e(g, f.parent[s], s);
  }

  // Check every fundamental cycle: non-tree pair (i,j), i<j, plus the
  // tree path back. First violation in edge-map order wins.
  for (const auto& [e, q] : g.edges()) {
    (void)q;
    auto [i, j] = e;
    if (i > j) continue;  // one orientation per unordered pair
    if (f.is_tree_pair(i, j)) continue;
    double cyc = edge_delta_e(g, i, j) + out.energy[i] - out.energy[j];
    if (std::abs(cyc) > tol) {
      CycleWitness w;
      w.path.push_back({i, j});
      auto back = tree_path(f, j, i);
      w.path.insert(w.path.end(), back.begin(), back.end());
      w.energy_sum = path_delta_e(g, w.path);
      return w;
    }
  }

  // Shift each pinned component so the pinned state carries its value.
  std::vector<double> shift(out.num_components, 0.0);
  std::vector<int> pinned(out.num_components, -1);
  for (const auto& [state, value] : pins) {
    if (state < 0 || state >= n)
      throw ValidationError("pin references unknown state");
    int c = out.component[state];
    if (pinned[c] >= 0)
      throw ValidationError("two pins in one connected component");
    pinned[c] = state;
    shift[c] = value - out.energy[state];
  }
  for (int c = 0; c < out.num_components; ++c)
    if (pinned[c] >= 0) out.reference[c] = pinned[c];
  for (int s = 0; s < n; ++s) out.energy[s] += shift[out.component[s]];
  return out;
}

Distribution boltzmann(const EnergyAssignment& e) {
  int n = static_cast<int>(e.energy.size());
  std::vector<double> low(e.num_components,
                          std::numeric_limits<double>::infinity());
  for (int s = 0; s < n; ++s)
    low[e.component[s]] = std::min(low[e.component[s]], e.energy[s]);

  Distribution d;
  d.p.assign(n, 0.0);
  double z = 0.0;
  for (int s = 0; s < n; ++s) {
    d.p[s] = std::exp(-(e.energy[s] - low[e.component[s]]));
    z += d.p[s];
  }
  d.z = z;
  for (double& v : d.p) v /= z;
  return d;
}

DetailedBalanceReport verify_detailed_balance(const Distribution& p,
                                              const RateGraph& g, double tol) {
  if (static_cast<int>(p.p.size()) != g.num_states())
    throw ValidationError("distribution does not cover the graph's states");
  DetailedBalanceReport r;
  for (const auto& [e, q] : g.edges()) {
    auto [i, j] = e;
    if (i > j && g.has_edge(j, i)) continue;  // counted from the other side
    double res = std::abs(p.p[i] * q - p.p[j] * g.rate(j, i));
    if (res > r.max_residual) {
      r.max_residual = res;
      r.worst_from = i;
      r.worst_to = j;
    }
  }
  r.pass = r.max_residual <= tol;
  return r;
}

std::string rate_graph_to_json(const RateGraph& g) {
  nlohmann::json j;
  j["states"] = g.states();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& [e, q] : g.edges())
    edges.push_back({{"from", g.key_of(e.first)},
                     {"to", g.key_of(e.second)},
                     {"rate", q}});
  return j.dump(2);
}

RateGraph rate_graph_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RateGraph g;
  for (const auto& s : j.at("states")) g.add_state(s.get<std::string>());
  for (const auto& e : j.at("edges")) {
    int a = g.state_id(e.at("from").get<std::string>());
    int b = g.state_id(e.at("to").get<std::string>());
    if (a < 0 || b < 0) throw ValidationError("edge references unknown state");
    g.add_rate(a, b, e.at("rate").get<double>());
  }
  return g;
}

std::string rate_graph_to_dot(const RateGraph& g) {
  std::ostringstream os;
  os << "digraph chain {\n";
  for (int s = 0; s < g.num_states(); ++s)
    os << "  n" << s << " [label=\"" << g.key_of(s) << "\"];\n";
  for (const auto& [e, q] : g.edges()) {
    os << "  n" << e.first << " -> n" << e.second << " [label=\"q=" << q;
    if (g.has_edge(e.second, e.first))
      os << " dE=" << edge_delta_e(g, e.first, e.second);
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ctmceq

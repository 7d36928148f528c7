#include "ctmceq/sitegraph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ctmceq/errors.hpp"
#include "json.hpp"

namespace ctmceq {

int AgentSignature::site_index(const std::string& s) const {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites[i] == s) return static_cast<int>(i);
  return -1;
}

int AgentSignature::state_index(int site, const std::string& v) const {
  const auto& dom = states.at(site);
  for (std::size_t i = 0; i < dom.size(); ++i)
    if (dom[i] == v) return static_cast<int>(i);
  return -1;
}

int SignatureTable::agent_index(const std::string& name) const {
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].name == name) return static_cast<int>(i);
  return -1;
}

int SiteGraph::add_agent(int sig) {
  const auto& s = sigs->at(sig);
  Agent a;
  a.sig = sig;
  a.state.assign(s.sites.size(), -1);
  a.bond.assign(s.sites.size(), BondRef{});
  agents.push_back(std::move(a));
  return static_cast<int>(agents.size()) - 1;
}

void SiteGraph::bind(int a, int sa, int b, int sb) {
  if (agents[a].bond[sa].attached() || agents[b].bond[sb].attached())
    throw ApplyError("bind: endpoint already in use");
  if (a == b && sa == sb) throw ApplyError("bind: endpoint bonded to itself");
  agents[a].bond[sa] = {b, sb};
  agents[b].bond[sb] = {a, sa};
}

void SiteGraph::unbind(int a, int sa, int b, int sb) {
  if (!(agents[a].bond[sa] == BondRef{b, sb}) ||
      !(agents[b].bond[sb] == BondRef{a, sa}))
    throw ApplyError("unbind: bond not present between given endpoints");
  agents[a].bond[sa] = BondRef{};
  agents[b].bond[sb] = BondRef{};
}

void SiteGraph::validate() const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Agent& a = agents[i];
    const auto& sig = sigs->at(a.sig);
    if (a.state.size() != sig.sites.size() || a.bond.size() != sig.sites.size())
      throw ValidationError("agent " + std::to_string(i) +
                            " does not match its signature arity");
    for (std::size_t s = 0; s < sig.sites.size(); ++s) {
      int st = a.state[s];
      if (st >= 0 && st >= static_cast<int>(sig.states[s].size()))
        throw ValidationError("internal state out of domain");
      if (st < 0 && !sig.states[s].empty())
        throw ValidationError("site " + sig.sites[s] + " of " + sig.name +
                              " needs a concrete internal state");
      const BondRef& b = a.bond[s];
      if (!b.attached()) continue;
      if (b.agent < 0 || b.agent >= static_cast<int>(agents.size()))
        throw ValidationError("bond endpoint out of range");
      if (b.agent == static_cast<int>(i) && b.site == static_cast<int>(s))
        throw ValidationError("endpoint bonded to itself");
      const BondRef& back = agents[b.agent].bond[b.site];
      if (!(back == BondRef{static_cast<int>(i), static_cast<int>(s)}))
        throw ValidationError("bond pairing not mutual");
    }
  }
}

namespace {

// Ordered-partition colour refinement. Cell order is isomorphism
// invariant: the initial order sorts by an exact invariant string and
// every split orders sub-cells by their (invariant) split keys.
struct Refinement {
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_of;  // agent -> cell index
};

std::string invariant_seed(const SiteGraph& g, int a) {
  const Agent& ag = g.agents[a];
  std::ostringstream os;
  os << ag.sig;
  for (std::size_t s = 0; s < ag.state.size(); ++s) {
    os << '.' << ag.state[s] << (ag.bond[s].attached() ? 'b' : 'f');
  }
  return os.str();
}

Refinement refine(const SiteGraph& g) {
  int n = static_cast<int>(g.agents.size());
  Refinement r;
  r.cell_of.assign(n, 0);

  std::map<std::string, std::vector<int>> seed;
  for (int a = 0; a < n; ++a) seed[invariant_seed(g, a)].push_back(a);
  for (auto& [k, v] : seed) {
    (void)k;
    for (int a : v) r.cell_of[a] = static_cast<int>(r.cells.size());
    r.cells.push_back(v);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::vector<int>> next;
    next.reserve(r.cells.size());
    std::vector<int> next_of(n, 0);
    for (const auto& cell : r.cells) {
      if (cell.size() == 1) {
        next_of[cell[0]] = static_cast<int>(next.size());
        next.push_back(cell);
        continue;
      }
      // Split key: per site, the current cell of the peer (or -1).
      std::map<std::vector<int>, std::vector<int>> split;
      for (int a : cell) {
        std::vector<int> key;
        for (const BondRef& b : g.agents[a].bond) {
          key.push_back(b.attached() ? r.cell_of[b.agent] : -1);
          key.push_back(b.attached() ? b.site : -1);
        }
        split[key].push_back(a);
      }
      if (split.size() > 1) changed = true;
      for (auto& [k, v] : split) {
        (void)k;
        for (int a : v) next_of[a] = static_cast<int>(next.size());
        next.push_back(v);
      }
    }
    r.cells = std::move(next);
    r.cell_of = std::move(next_of);
  }
  return r;
}

// Depth-first serialization with on-the-fly numbering, descending
// through bonds in site order. Deterministic given the root.
std::string serialize_from(const SiteGraph& g, int root) {
  std::vector<int> num(g.agents.size(), -1);
  int next = 0;
  std::ostringstream os;

  // Explicit stack of (agent, next site to handle).
  std::vector<std::pair<int, int>> stack;
  auto open_agent = [&](int a) {
    num[a] = next++;
    const Agent& ag = g.agents[a];
    os << '(' << g.sigs->at(ag.sig).name;
    stack.push_back({a, 0});
  };
  open_agent(root);
  while (!stack.empty()) {
    auto& [a, s] = stack.back();
    const Agent& ag = g.agents[a];
    if (s >= static_cast<int>(ag.bond.size())) {
      os << ')';
      stack.pop_back();
      continue;
    }
    int site = s++;
    os << ' ' << ag.state[site] << ':';
    const BondRef& b = ag.bond[site];
    if (!b.attached()) {
      os << 'f';
    } else if (num[b.agent] >= 0) {
      os << 'r' << num[b.agent] << '.' << b.site;
    } else {
      os << 'd' << b.site;
      open_agent(b.agent);
    }
  }
  return os.str();
}

}  // namespace

std::string canonical_key(const SiteGraph& g) {
  int n = static_cast<int>(g.agents.size());
  if (n == 0) return "{}";

  Refinement r = refine(g);

  // Connected components over bonds.
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int a = 0; a < n; ++a) {
    if (comp[a] >= 0) continue;
    std::vector<int> q{a};
    comp[a] = ncomp;
    for (std::size_t h = 0; h < q.size(); ++h)
      for (const BondRef& b : g.agents[q[h]].bond)
        if (b.attached() && comp[b.agent] < 0) {
          comp[b.agent] = ncomp;
          q.push_back(b.agent);
        }
    ++ncomp;
  }

  // Root candidates per component: members of the first cell of
  // minimal size that intersects the component.
  std::vector<std::string> keys(ncomp);
  for (int c = 0; c < ncomp; ++c) {
    int best_cell = -1;
    std::size_t best_size = 0;
    std::vector<int> candidates;
    for (std::size_t ci = 0; ci < r.cells.size(); ++ci) {
      std::vector<int> members;
      for (int a : r.cells[ci])
        if (comp[a] == c) members.push_back(a);
      if (members.empty()) continue;
      if (best_cell < 0 || members.size() < best_size) {
        best_cell = static_cast<int>(ci);
        best_size = members.size();
        candidates = members;
        if (best_size == 1) break;
      }
    }
    std::string best;
    for (int root : candidates) {
      std::string s = serialize_from(g, root);
      if (best.empty() || s < best) best = s;
    }
    keys[c] = best;
  }
  std::sort(keys.begin(), keys.end());
  std::ostringstream os;
  os << '{';
  for (const auto& k : keys) os << k;
  os << '}';
  return os.str();
}

std::string sitegraph_to_dot(const SiteGraph& g) {
  std::ostringstream os;
  os << "graph sitegraph {\n";
  for (std::size_t a = 0; a < g.agents.size(); ++a) {
    const Agent& ag = g.agents[a];
    const auto& sig = g.sigs->at(ag.sig);
    os << "  a" << a << " [label=\"" << sig.name;
    for (std::size_t s = 0; s < sig.sites.size(); ++s)
      if (ag.state[s] >= 0)
        os << "\\n" << sig.sites[s] << "=" << sig.states[s][ag.state[s]];
    os << "\"];\n";
  }
  for (std::size_t a = 0; a < g.agents.size(); ++a)
    for (std::size_t s = 0; s < g.agents[a].bond.size(); ++s) {
      const BondRef& b = g.agents[a].bond[s];
      if (!b.attached()) continue;
      if (b.agent < static_cast<int>(a) ||
          (b.agent == static_cast<int>(a) && b.site < static_cast<int>(s)))
        continue;
      os << "  a" << a << " -- a" << b.agent << " [label=\""
         << g.sigs->at(g.agents[a].sig).sites[s] << "-"
         << g.sigs->at(g.agents[b.agent].sig).sites[b.site] << "\"];\n";
    }
  os << "}\n";
  return os.str();
}

std::string sitegraph_to_json(const SiteGraph& g) {
  nlohmann::json j;
  auto& agents = j["agents"] = nlohmann::json::array();
  for (const Agent& ag : g.agents) {
    const auto& sig = g.sigs->at(ag.sig);
    nlohmann::json a;
    a["type"] = sig.name;
    for (std::size_t s = 0; s < sig.sites.size(); ++s) {
      nlohmann::json site;
      if (ag.state[s] >= 0) site["state"] = sig.states[s][ag.state[s]];
      if (ag.bond[s].attached())
        site["bond"] = {{"agent", ag.bond[s].agent},
                        {"site", g.sigs->at(g.agents[ag.bond[s].agent].sig)
                                     .sites[ag.bond[s].site]}};
      a["sites"][sig.sites[s]] = site;
    }
    agents.push_back(a);
  }
  return j.dump(2);
}

}  // namespace ctmceq

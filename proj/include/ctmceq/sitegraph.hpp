#ifndef CTMCEQ_SITEGRAPH_HPP
#define CTMCEQ_SITEGRAPH_HPP

#include <memory>
#include <string>
#include <vector>

namespace ctmceq {

/// Agent type: a name, ordered sites, and an optional finite internal
/// state domain per site (empty domain = the site holds no state).
struct AgentSignature {
  std::string name;
  std::vector<std::string> sites;
  std::vector<std::vector<std::string>> states;  // per site

  int site_index(const std::string& s) const;
  int state_index(int site, const std::string& v) const;
};

struct SignatureTable {
  std::vector<AgentSignature> agents;

  int agent_index(const std::string& name) const;
  const AgentSignature& at(int i) const { return agents.at(i); }
};

using SigPtr = std::shared_ptr<const SignatureTable>;

struct BondRef {
  int agent = -1;
  int site = -1;
  bool attached() const { return agent >= 0; }
  bool operator==(const BondRef&) const = default;
};

struct Agent {
  int sig = -1;
  std::vector<int> state;    // per site; -1 = no internal state
  std::vector<BondRef> bond;  // per site
};

/// Concrete site graph: a multiset of agents plus a partial pairing of
/// (agent, site) endpoints. Each endpoint holds at most one bond.
struct SiteGraph {
  SigPtr sigs;
  std::vector<Agent> agents;

  int add_agent(int sig);
  void bind(int a, int sa, int b, int sb);
  void unbind(int a, int sa, int b, int sb);

  /// Checks the pairing invariants (mutual bonds, endpoints in range,
  /// no endpoint bonded to itself, states within declared domains).
  void validate() const;
};

/// Canonical key: equal for isomorphic graphs, distinct otherwise.
/// Printable, deterministic, independent of agent order and of how the
/// graph was produced. Chain/tree-shaped components resolve by colour
/// refinement alone; symmetric components fall back to trying each
/// root candidate in the first minimal refinement cell.
std::string canonical_key(const SiteGraph& g);

inline bool isomorphic(const SiteGraph& a, const SiteGraph& b) {
  return canonical_key(a) == canonical_key(b);
}

std::string sitegraph_to_dot(const SiteGraph& g);
std::string sitegraph_to_json(const SiteGraph& g);

}  // namespace ctmceq

#endif

#ifndef CTMCEQ_PATTERN_HPP
#define CTMCEQ_PATTERN_HPP

#include <vector>

#include "ctmceq/sitegraph.hpp"

namespace ctmceq {

enum class LinkCk {
  kAny,      // unmentioned: don't care, don't write
  kFree,     // mentioned without a bond
  kBoundAny, // bound to anything
  kBoundTo,  // bound to a specific slot/site
};

struct PatternSite {
  LinkCk link = LinkCk::kAny;
  int peer_slot = -1;  // for kBoundTo
  int peer_site = -1;
  bool any_state = true;
  std::vector<int> allowed;  // sorted state ids, when !any_state
};

struct PatternAgent {
  int sig = -1;
  std::vector<PatternSite> sites;
};

struct Pattern {
  SigPtr sigs;
  std::vector<PatternAgent> agents;

  int add_agent(int sig);
  void require_bond(int a, int sa, int b, int sb);
};

/// Injective slot -> agent map preserving signature, constrained
/// internal states, constrained bonds and constrained freeness.
using Embedding = std::vector<int>;

bool embedding_respects(const Pattern& p, const SiteGraph& g,
                        const Embedding& e);

/// Complete, duplicate-free list in deterministic order (backtracking
/// anchored at the lowest-indexed candidate for the first slot).
std::vector<Embedding> find_embeddings(const Pattern& p, const SiteGraph& g);

}  // namespace ctmceq

#endif

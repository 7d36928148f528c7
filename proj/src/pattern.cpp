#include "ctmceq/pattern.hpp"

#include <algorithm>

#include "ctmceq/errors.hpp"

namespace ctmceq {

int Pattern::add_agent(int sig) {
  PatternAgent a;
  a.sig = sig;
  a.sites.assign(sigs->at(sig).sites.size(), PatternSite{});
  agents.push_back(std::move(a));
  return static_cast<int>(agents.size()) - 1;
}

void Pattern::require_bond(int a, int sa, int b, int sb) {
  agents[a].sites[sa].link = LinkCk::kBoundTo;
  agents[a].sites[sa].peer_slot = b;
  agents[a].sites[sa].peer_site = sb;
  agents[b].sites[sb].link = LinkCk::kBoundTo;
  agents[b].sites[sb].peer_slot = a;
  agents[b].sites[sb].peer_site = sa;
}

namespace {

bool site_matches(const PatternSite& ps, const Agent& ag, int site,
                  const Embedding& image) {
  if (!ps.any_state) {
    int st = ag.state[site];
    if (!std::binary_search(ps.allowed.begin(), ps.allowed.end(), st))
      return false;
  }
  const BondRef& b = ag.bond[site];
  switch (ps.link) {
    case LinkCk::kAny:
      return true;
    case LinkCk::kFree:
      return !b.attached();
    case LinkCk::kBoundAny:
      return b.attached();
    case LinkCk::kBoundTo: {
      if (!b.attached()) return false;
      if (b.site != ps.peer_site) return false;
      int img = image[ps.peer_slot];
      return img < 0 || img == b.agent;  // peer not yet placed: defer
    }
  }
  return false;
}

bool agent_matches(const Pattern& p, int slot, const SiteGraph& g, int cand,
                   const Embedding& image) {
  const PatternAgent& pa = p.agents[slot];
  const Agent& ag = g.agents[cand];
  if (ag.sig != pa.sig) return false;
  for (std::size_t s = 0; s < pa.sites.size(); ++s)
    if (!site_matches(pa.sites[s], ag, static_cast<int>(s), image)) return false;
  return true;
}

}  // namespace

bool embedding_respects(const Pattern& p, const SiteGraph& g,
                        const Embedding& e) {
  if (e.size() != p.agents.size()) return false;
  std::vector<bool> used(g.agents.size(), false);
  for (int img : e) {
    if (img < 0 || img >= static_cast<int>(g.agents.size())) return false;
    if (used[img]) return false;  // injectivity
    used[img] = true;
  }
  for (std::size_t slot = 0; slot < p.agents.size(); ++slot)
    if (!agent_matches(p, static_cast<int>(slot), g, e[slot], e)) return false;
  return true;
}

std::vector<Embedding> find_embeddings(const Pattern& p, const SiteGraph& g) {
  int k = static_cast<int>(p.agents.size());
  std::vector<Embedding> out;
  if (k == 0) {
    out.push_back({});  // the empty embedding
    return out;
  }

  // Match plan: slot 0 first, then slots bond-connected to placed ones
  // (forced images), then the lowest unplanned slot of the next piece.
  std::vector<int> plan;
  std::vector<bool> planned(k, false);
  while (static_cast<int>(plan.size()) < k) {
    int pick = -1;
    for (int s = 0; s < k && pick < 0; ++s) {
      if (planned[s]) continue;
      for (const PatternSite& ps : p.agents[s].sites)
        if (ps.link == LinkCk::kBoundTo && planned[ps.peer_slot]) {
          pick = s;
          break;
        }
    }
    if (pick < 0)
      for (int s = 0; s < k; ++s)
        if (!planned[s]) {
          pick = s;
          break;
        }
    planned[pick] = true;
    plan.push_back(pick);
  }

  Embedding image(k, -1);
  std::vector<bool> used(g.agents.size(), false);

  auto candidates_for = [&](int slot) {
    // A slot bonded to an already-placed slot has a forced candidate.
    for (const PatternSite& ps : p.agents[slot].sites)
      if (ps.link == LinkCk::kBoundTo && image[ps.peer_slot] >= 0) {
        const BondRef& b =
            g.agents[image[ps.peer_slot]].bond[ps.peer_site];
        std::vector<int> c;
        if (b.attached()) c.push_back(b.agent);
        return c;
      }
    std::vector<int> c(g.agents.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<int>(i);
    return c;
  };

  // Iterative backtracking in ascending candidate order.
  std::vector<std::pair<std::vector<int>, std::size_t>> frames;
  frames.push_back({candidates_for(plan[0]), 0});
  while (!frames.empty()) {
    auto& [cands, idx] = frames.back();
    int depth = static_cast<int>(frames.size()) - 1;
    int slot = plan[depth];
    if (image[slot] >= 0) {
      used[image[slot]] = false;
      image[slot] = -1;
    }
    bool advanced = false;
    while (idx < cands.size()) {
      int cand = cands[idx++];
      if (used[cand]) continue;
      if (!agent_matches(p, slot, g, cand, image)) continue;
      image[slot] = cand;
      used[cand] = true;
      if (depth + 1 == k) {
        out.push_back(image);
        used[cand] = false;
        image[slot] = -1;
        continue;
      }
      frames.push_back({candidates_for(plan[depth + 1]), 0});
      advanced = true;
      break;
    }
    if (!advanced && idx >= cands.size()) frames.pop_back();
  }
  // Emitted in DFS order over the plan; report sorted by slot images
  // so the order is anchored at the first slot's candidates.
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ctmceq

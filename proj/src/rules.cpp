#include "ctmceq/rules.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "ctmceq/errors.hpp"

namespace ctmceq {

namespace {

using Endpoint = std::tuple<bool, int, int>;  // (created, idx, site)
using BondPair = std::pair<Endpoint, Endpoint>;

BondPair norm(Endpoint a, Endpoint b) {
  return a < b ? BondPair{a, b} : BondPair{b, a};
}

struct SideInfo {
  // For each slot of the source side: preserved partner on the other
  // side (slot id) or -1.
  std::vector<int> partner;
  std::vector<bool> deleted;  // src slots without a same-signature partner
};

// Directed rule synthesis: diff `src -> dst` with positional alignment.
DirectedRule make_directed(const RulePairDecl& decl, bool forward) {
  const Pattern& src = forward ? decl.lhs : decl.rhs;
  const Pattern& dst = forward ? decl.rhs : decl.lhs;

  int ns = static_cast<int>(src.agents.size());
  int nd = static_cast<int>(dst.agents.size());
  std::vector<int> src_partner(ns, -1), dst_partner(nd, -1);
  for (auto [l, r] : decl.alignment) {
    int s = forward ? l : r;
    int d = forward ? r : l;
    if (s < 0 || d < 0) continue;
    if (src.agents[s].sig == dst.agents[d].sig) {
      src_partner[s] = d;
      dst_partner[d] = s;
    }
  }

  // Creation order: dst slots without partner, ascending.
  std::vector<int> created_ref(nd, -1);
  std::vector<int> created_slots;
  for (int d = 0; d < nd; ++d)
    if (dst_partner[d] < 0) {
      created_ref[d] = static_cast<int>(created_slots.size());
      created_slots.push_back(d);
    }

  auto dst_slotref = [&](int d) {
    return dst_partner[d] >= 0 ? SlotRef{false, dst_partner[d]}
                               : SlotRef{true, created_ref[d]};
  };

  // Bond sets in action coordinates.
  std::set<BondPair> src_bonds, dst_bonds;
  for (int a = 0; a < ns; ++a)
    for (std::size_t s = 0; s < src.agents[a].sites.size(); ++s) {
      const PatternSite& ps = src.agents[a].sites[s];
      if (ps.link == LinkCk::kBoundTo)
        src_bonds.insert(norm({false, a, static_cast<int>(s)},
                              {false, ps.peer_slot, ps.peer_site}));
    }
  for (int d = 0; d < nd; ++d)
    for (std::size_t s = 0; s < dst.agents[d].sites.size(); ++s) {
      const PatternSite& ps = dst.agents[d].sites[s];
      if (ps.link == LinkCk::kBoundTo) {
        SlotRef ra = dst_slotref(d), rb = dst_slotref(ps.peer_slot);
        dst_bonds.insert(norm({ra.created, ra.idx, static_cast<int>(s)},
                              {rb.created, rb.idx, ps.peer_site}));
      }
    }

  DirectedRule rule;
  rule.pair_name = decl.name;
  rule.label = decl.name + (forward ? "" : "_rev");
  rule.lhs = src;
  rule.rate = forward ? decl.fwd_rate : decl.bwd_rate;
  rule.delta_e = forward ? decl.delta_e : -decl.delta_e;
  rule.forward = forward;

  std::vector<Action> unbinds, sets, dels, creates, binds;

  for (const BondPair& b : src_bonds)
    if (!dst_bonds.count(b)) {
      auto [ea, eb] = b;
      unbinds.push_back(ActUnbind{
          {SlotRef{std::get<0>(ea), std::get<1>(ea)}, std::get<2>(ea)},
          {SlotRef{std::get<0>(eb), std::get<1>(eb)}, std::get<2>(eb)}});
    }

  // Preserved agents: state updates plus link-consistency checks.
  for (int a = 0; a < ns; ++a) {
    int d = src_partner[a];
    if (d < 0) continue;
    const PatternAgent& pa = src.agents[a];
    const PatternAgent& pd = dst.agents[d];
    for (std::size_t s = 0; s < pa.sites.size(); ++s) {
      const PatternSite& ss = pa.sites[s];
      const PatternSite& ds = pd.sites[s];
      if (!ds.any_state) {
        if (ds.allowed.size() == 1) {
          bool same = !ss.any_state && ss.allowed.size() == 1 &&
                      ss.allowed[0] == ds.allowed[0];
          if (!same)
            sets.push_back(
                ActSetState{{SlotRef{false, a}, static_cast<int>(s)},
                            ds.allowed[0]});
        } else if (ss.any_state || ss.allowed != ds.allowed) {
          throw ValidationError("rule '" + decl.name +
                                "': ambiguous state change on a kept agent");
        }
      }
      bool src_known =
          ss.link == LinkCk::kFree || ss.link == LinkCk::kBoundTo;
      if (ds.link == LinkCk::kBoundTo) {
        SlotRef rb = dst_slotref(ds.peer_slot);
        BondPair nb = norm({false, a, static_cast<int>(s)},
                           {rb.created, rb.idx, ds.peer_site});
        bool kept = src_bonds.count(nb) && dst_bonds.count(nb);
        if (!kept && !src_known)
          throw ValidationError("rule '" + decl.name +
                                "': binds a site whose left-hand binding "
                                "is unconstrained");
      } else if (ds.link == LinkCk::kFree && !src_known) {
        throw ValidationError("rule '" + decl.name +
                              "': frees a site whose left-hand binding "
                              "is unconstrained");
      }
    }
  }

  // Deleted agents: unbinding already collected; require every site
  // accounted for so deletion never severs silently.
  for (int a = 0; a < ns; ++a) {
    if (src_partner[a] >= 0) continue;
    for (const PatternSite& ps : src.agents[a].sites)
      if (ps.link == LinkCk::kAny || ps.link == LinkCk::kBoundAny)
        throw ValidationError("rule '" + decl.name +
                              "': deleted agent has an unconstrained site");
    dels.push_back(ActDelete{SlotRef{false, a}});
  }

  // Created agents: need concrete states on every domain site.
  for (int d : created_slots) {
    const PatternAgent& pd = dst.agents[d];
    ActCreate c;
    c.sig = pd.sig;
    c.state.assign(pd.sites.size(), -1);
    for (std::size_t s = 0; s < pd.sites.size(); ++s) {
      const PatternSite& ps = pd.sites[s];
      if (ps.link == LinkCk::kAny || ps.link == LinkCk::kBoundAny)
        throw ValidationError("rule '" + decl.name +
                              "': created agent has an unconstrained site");
      bool has_domain = !dst.sigs->at(pd.sig).states[s].empty();
      if (has_domain) {
        if (ps.any_state || ps.allowed.size() != 1)
          throw ValidationError("rule '" + decl.name +
                                "': created agent needs a concrete state");
        c.state[s] = ps.allowed[0];
      }
    }
    creates.push_back(c);
  }

  for (const BondPair& b : dst_bonds)
    if (!src_bonds.count(b)) {
      auto [ea, eb] = b;
      binds.push_back(ActBind{
          {SlotRef{std::get<0>(ea), std::get<1>(ea)}, std::get<2>(ea)},
          {SlotRef{std::get<0>(eb), std::get<1>(eb)}, std::get<2>(eb)}});
    }

  auto& acts = rule.actions;
  acts.insert(acts.end(), unbinds.begin(), unbinds.end());
  acts.insert(acts.end(), sets.begin(), sets.end());
  acts.insert(acts.end(), dels.begin(), dels.end());
  acts.insert(acts.end(), creates.begin(), creates.end());
  acts.insert(acts.end(), binds.begin(), binds.end());
  return rule;
}

// Choice sites: set-valued states on agents that exist on one side
// only (deleted one way, created the other). Each expands to one
// variant per state so both directions stay concrete.
struct ChoicePoint {
  bool on_lhs;
  int slot;
  int site;
  std::vector<int> states;
};

std::vector<ChoicePoint> choice_points(const RulePairDecl& decl) {
  std::vector<ChoicePoint> cps;
  std::vector<bool> lhs_paired(decl.lhs.agents.size(), false);
  std::vector<bool> rhs_paired(decl.rhs.agents.size(), false);
  for (auto [l, r] : decl.alignment)
    if (l >= 0 && r >= 0 && decl.lhs.agents[l].sig == decl.rhs.agents[r].sig) {
      lhs_paired[l] = true;
      rhs_paired[r] = true;
    }
  auto scan = [&](const Pattern& p, const std::vector<bool>& paired,
                  bool on_lhs) {
    for (std::size_t a = 0; a < p.agents.size(); ++a) {
      if (paired[a]) continue;
      for (std::size_t s = 0; s < p.agents[a].sites.size(); ++s) {
        const PatternSite& ps = p.agents[a].sites[s];
        if (!ps.any_state && ps.allowed.size() > 1)
          cps.push_back({on_lhs, static_cast<int>(a), static_cast<int>(s),
                         ps.allowed});
      }
    }
  };
  scan(decl.lhs, lhs_paired, true);
  scan(decl.rhs, rhs_paired, false);
  return cps;
}

}  // namespace

std::vector<DirectedRule> expand_rule_pair(const RulePairDecl& decl) {
  std::vector<ChoicePoint> cps = choice_points(decl);

  std::vector<RulePairDecl> variants{decl};
  std::vector<std::string> tags{""};
  for (const ChoicePoint& cp : cps) {
    std::vector<RulePairDecl> next;
    std::vector<std::string> next_tags;
    for (std::size_t v = 0; v < variants.size(); ++v)
      for (int st : cp.states) {
        RulePairDecl d = variants[v];
        Pattern& p = cp.on_lhs ? d.lhs : d.rhs;
        p.agents[cp.slot].sites[cp.site].allowed = {st};
        const auto& sig = p.sigs->at(p.agents[cp.slot].sig);
        next.push_back(std::move(d));
        next_tags.push_back(tags[v] + "#" + sig.states[cp.site][st]);
      }
    variants = std::move(next);
    tags = std::move(next_tags);
  }

  std::vector<DirectedRule> out;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    RulePairDecl d = variants[v];
    d.name = decl.name + tags[v];
    DirectedRule fwd = make_directed(d, true);
    if (d.reversible()) {
      DirectedRule bwd = make_directed(d, false);
      int fi = static_cast<int>(out.size());
      fwd.reverse_index = fi + 1;
      bwd.reverse_index = fi;
      out.push_back(std::move(fwd));
      out.push_back(std::move(bwd));
    } else {
      out.push_back(std::move(fwd));
    }
  }
  for (auto& r : out) validate_rule(r);
  return out;
}

void Model::rebuild_rules() {
  rules.clear();
  // Keep forward rules of all pairs first, then the backwards, so the
  // enumeration order matches the declaration order per orientation.
  std::vector<DirectedRule> fwd, bwd;
  for (const RulePairDecl& p : pairs) {
    auto expanded = expand_rule_pair(p);
    for (auto& r : expanded)
      (r.forward ? fwd : bwd).push_back(std::move(r));
  }
  // reverse_index must be recomputed in the flattened layout: pair up
  // by label.
  rules = std::move(fwd);
  std::size_t nf = rules.size();
  rules.insert(rules.end(), bwd.begin(), bwd.end());
  std::map<std::string, int> by_label;
  for (std::size_t i = 0; i < rules.size(); ++i)
    by_label[rules[i].label] = static_cast<int>(i);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::string& l = rules[i].label;
    std::string partner = i < nf ? l + "_rev" : l.substr(0, l.size() - 4);
    auto it = by_label.find(partner);
    rules[i].reverse_index = it == by_label.end() ? -1 : it->second;
  }
}

void validate_rule(const DirectedRule& r) {
  int ns = static_cast<int>(r.lhs.agents.size());
  int created = 0;
  std::set<std::tuple<bool, int, int>> unbound;
  for (const Action& act : r.actions) {
    if (std::holds_alternative<ActCreate>(act)) {
      ++created;
    } else if (const auto* d = std::get_if<ActDelete>(&act)) {
      if (d->target.created || d->target.idx < 0 || d->target.idx >= ns)
        throw ValidationError("delete target out of range");
      const PatternAgent& pa = r.lhs.agents[d->target.idx];
      for (std::size_t s = 0; s < pa.sites.size(); ++s) {
        const PatternSite& ps = pa.sites[s];
        if (ps.link == LinkCk::kFree) continue;
        if (ps.link == LinkCk::kBoundTo &&
            unbound.count({false, d->target.idx, static_cast<int>(s)}))
          continue;
        throw ValidationError(
            "rule '" + r.label +
            "': deleted agent keeps a bond that is not explicitly unbound");
      }
    } else if (const auto* u = std::get_if<ActUnbind>(&act)) {
      unbound.insert({u->a.agent.created, u->a.agent.idx, u->a.site});
      unbound.insert({u->b.agent.created, u->b.agent.idx, u->b.site});
    }
  }
  auto check_ref = [&](const SlotRef& sr) {
    if (sr.created ? (sr.idx < 0 || sr.idx >= created)
                   : (sr.idx < 0 || sr.idx >= ns))
      throw ValidationError("action target out of range in '" + r.label + "'");
  };
  for (const Action& act : r.actions) {
    if (const auto* b = std::get_if<ActBind>(&act)) {
      check_ref(b->a.agent);
      check_ref(b->b.agent);
    } else if (const auto* u = std::get_if<ActUnbind>(&act)) {
      check_ref(u->a.agent);
      check_ref(u->b.agent);
    } else if (const auto* s = std::get_if<ActSetState>(&act)) {
      check_ref(s->port.agent);
    } else if (const auto* d = std::get_if<ActDelete>(&act)) {
      check_ref(d->target);
    }
  }
}

SiteGraph apply_rule(const DirectedRule& r, const Embedding& e,
                     const SiteGraph& g) {
  SiteGraph out = g;
  std::vector<int> created_idx;
  std::vector<bool> dead(out.agents.size(), false);

  auto resolve = [&](const SlotRef& sr) -> int {
    if (sr.created) {
      if (sr.idx < 0 || sr.idx >= static_cast<int>(created_idx.size()))
        throw ApplyError("action references an agent not yet created");
      return created_idx[sr.idx];
    }
    if (sr.idx < 0 || sr.idx >= static_cast<int>(e.size()))
      throw ApplyError("action references a slot outside the embedding");
    return e[sr.idx];
  };

  for (const Action& act : r.actions) {
    if (const auto* c = std::get_if<ActCreate>(&act)) {
      int idx = out.add_agent(c->sig);
      out.agents[idx].state = c->state;
      dead.push_back(false);
      created_idx.push_back(idx);
    } else if (const auto* d = std::get_if<ActDelete>(&act)) {
      int idx = resolve(d->target);
      // Defined semantics: deletion severs any remaining bonds.
      Agent& ag = out.agents[idx];
      for (std::size_t s = 0; s < ag.bond.size(); ++s)
        if (ag.bond[s].attached()) {
          out.agents[ag.bond[s].agent].bond[ag.bond[s].site] = BondRef{};
          ag.bond[s] = BondRef{};
        }
      dead[idx] = true;
    } else if (const auto* b = std::get_if<ActBind>(&act)) {
      out.bind(resolve(b->a.agent), b->a.site, resolve(b->b.agent), b->b.site);
    } else if (const auto* u = std::get_if<ActUnbind>(&act)) {
      out.unbind(resolve(u->a.agent), u->a.site, resolve(u->b.agent),
                 u->b.site);
    } else if (const auto* s = std::get_if<ActSetState>(&act)) {
      out.agents[resolve(s->port.agent)].state[s->port.site] = s->state;
    }
  }

  // Compact, preserving survivor order.
  std::vector<int> remap(out.agents.size(), -1);
  std::vector<Agent> compacted;
  compacted.reserve(out.agents.size());
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    if (dead[i]) continue;
    remap[i] = static_cast<int>(compacted.size());
    compacted.push_back(std::move(out.agents[i]));
  }
  for (Agent& a : compacted)
    for (BondRef& b : a.bond)
      if (b.attached()) b.agent = remap[b.agent];
  out.agents = std::move(compacted);
  return out;
}

std::vector<TransitionEntry> enumerate_transitions(
    const SiteGraph& g, const std::vector<DirectedRule>& rules, RateMode mode) {
  std::vector<TransitionEntry> out;
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    auto embs = find_embeddings(rules[ri].lhs, g);
    if (embs.empty()) continue;
    if (mode == RateMode::kUnitRate) embs.resize(1);
    for (const Embedding& e : embs) {
      TransitionEntry t;
      t.rule_index = static_cast<int>(ri);
      t.embedding = e;
      t.succ_key = canonical_key(apply_rule(rules[ri], e, g));
      t.rate = rules[ri].rate;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<PropensityEntry> enumerate_propensities(
    const SiteGraph& g, const std::vector<DirectedRule>& rules, RateMode mode) {
  std::vector<PropensityEntry> out;
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    auto embs = find_embeddings(rules[ri].lhs, g);
    if (embs.empty()) continue;
    if (mode == RateMode::kUnitRate) embs.resize(1);
    for (const Embedding& e : embs)
      out.push_back({static_cast<int>(ri), e, rules[ri].rate});
  }
  return out;
}

}  // namespace ctmceq

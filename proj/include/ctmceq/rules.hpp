#ifndef CTMCEQ_RULES_HPP
#define CTMCEQ_RULES_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ctmceq/pattern.hpp"
#include "ctmceq/sitegraph.hpp"

namespace ctmceq {

/// Action targets reference either an lhs slot or a freshly created
/// agent (by creation order within the rule).
struct SlotRef {
  bool created = false;
  int idx = -1;
  bool operator==(const SlotRef&) const = default;
};

struct SitePort {
  SlotRef agent;
  int site = -1;
};

struct ActCreate {
  int sig = -1;
  std::vector<int> state;  // per site, concrete (-1 = none)
};
struct ActDelete {
  SlotRef target;
};
struct ActBind {
  SitePort a, b;
};
struct ActUnbind {
  SitePort a, b;
};
struct ActSetState {
  SitePort port;
  int state = -1;
};

using Action = std::variant<ActCreate, ActDelete, ActBind, ActUnbind, ActSetState>;

/// One directed rewrite rule. Rules come in reversible pairs produced
/// from a RulePairDecl; `reverse_index` links the two inside a flat
/// rule vector.
struct DirectedRule {
  std::string pair_name;
  std::string label;   // pair name + variant tag (+ "_rev" for backward)
  Pattern lhs;
  std::vector<Action> actions;
  double rate = 1.0;
  double delta_e = 0.0;      // forward-direction value for the pair
  bool forward = true;
  int reverse_index = -1;
};

/// Reversible rule pair as written: two pattern sides with positional
/// agent correspondence. `alignment` pairs lhs/rhs slots; -1 marks a
/// hole ('.') on one side (deleted or created agent).
struct RulePairDecl {
  std::string name;
  Pattern lhs, rhs;
  std::vector<std::pair<int, int>> alignment;
  double fwd_rate = 1.0;
  double bwd_rate = 0.0;  // 0 = one-directional rule
  double delta_e = 0.0;
  bool reversible() const { return bwd_rate > 0.0; }
};

/// Expands a declaration into concrete directed rules. A set-valued
/// internal state on an agent that one direction deletes (and the
/// other creates) expands into one variant per state, tagged
/// "name#state"; the variants pair up one-to-one.
std::vector<DirectedRule> expand_rule_pair(const RulePairDecl& decl);

/// Whole-model container: signatures, named concrete graphs, rule
/// pair declarations and their expanded directed rules.
struct Model {
  SigPtr sigs;
  std::vector<RulePairDecl> pairs;
  std::vector<DirectedRule> rules;
  std::map<std::string, SiteGraph> inits;

  void rebuild_rules();  // re-expand `pairs` into `rules`
};

/// Applies the rule at a valid embedding; returns the rewritten graph
/// (survivors keep their relative order, created agents append).
/// Deleting an agent severs its remaining bonds; compiled rules unbind
/// explicitly first, so reaching that path flags a malformed rule via
/// validate_rule at load time instead.
SiteGraph apply_rule(const DirectedRule& r, const Embedding& e,
                     const SiteGraph& g);

/// Static rule checks: action targets in range, bind/unbind endpoints
/// plausible, every site of a deleted agent either constrained free or
/// explicitly unbound first.
void validate_rule(const DirectedRule& r);

enum class RateMode { kEmbeddingWeighted, kUnitRate };

struct TransitionEntry {
  int rule_index = -1;
  Embedding embedding;
  std::string succ_key;
  double rate = 0.0;
};

/// All transitions out of g. embedding_weighted: one entry per
/// (rule, embedding), each carrying the rule rate. unit_rate: one
/// entry per rule with at least one embedding (the first embedding in
/// deterministic order is the representative).
std::vector<TransitionEntry> enumerate_transitions(
    const SiteGraph& g, const std::vector<DirectedRule>& rules, RateMode mode);

/// Propensity channels only (no successor materialization); used by
/// the simulator's direct-method sampler.
struct PropensityEntry {
  int rule_index = -1;
  Embedding embedding;
  double rate = 0.0;
};
std::vector<PropensityEntry> enumerate_propensities(
    const SiteGraph& g, const std::vector<DirectedRule>& rules, RateMode mode);

}  // namespace ctmceq

#endif

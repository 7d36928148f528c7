#include <set>

#include "ctmceq/errors.hpp"
#include "ctmceq/parser.hpp"
#include "ctmceq/simulator.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ctmceq;

namespace {

const char* kDecl = "%agent: S(l, r, x{a, b, *})\n";

}  // namespace

TEST_CASE("bind then unbind restores the original graph") {
  Model m = parse_model(
      std::string(kDecl) +
      "%rule: link S(r), S(l) -> S(r^1), S(l^1) @ 1, 1\n"
      "%init: g S(l, r, x{a}), S(l, r, x{b})\n");
  const SiteGraph& g = m.inits.at("g");
  std::string key = canonical_key(g);

  const DirectedRule& fwd = m.rules[0];
  const DirectedRule& bwd = m.rules[fwd.reverse_index];
  auto embs = find_embeddings(fwd.lhs, g);
  REQUIRE(!embs.empty());
  SiteGraph bound = apply_rule(fwd, embs[0], g);
  bound.validate();
  CHECK(canonical_key(bound) != key);

  auto back = find_embeddings(bwd.lhs, bound);
  REQUIRE(!back.empty());
  SiteGraph restored = apply_rule(bwd, back[0], bound);
  restored.validate();
  CHECK(canonical_key(restored) == key);
}

TEST_CASE("forward then reverse restores every compiled rule") {
  auto x = ctmceq::testing::worked_instance();
  auto p = ctmceq::testing::default_params();
  Encoding enc = compile(x, p, true);

  // Walk forward transitions for a few levels and test reversibility
  // of every applicable rule at every visited state.
  std::vector<SiteGraph> frontier{enc.initial()};
  std::set<std::string> seen{canonical_key(frontier[0])};
  for (int depth = 0; depth < 3; ++depth) {
    std::vector<SiteGraph> next;
    for (const SiteGraph& g : frontier) {
      for (std::size_t ri = 0; ri < enc.model.rules.size(); ++ri) {
        const DirectedRule& r = enc.model.rules[ri];
        for (const Embedding& e : find_embeddings(r.lhs, g)) {
          SiteGraph succ = apply_rule(r, e, g);
          succ.validate();
          REQUIRE(r.reverse_index >= 0);
          const DirectedRule& rev = enc.model.rules[r.reverse_index];
          bool restored = false;
          for (const Embedding& be : find_embeddings(rev.lhs, succ))
            if (canonical_key(apply_rule(rev, be, succ)) ==
                canonical_key(g))
              restored = true;
          CHECK(restored);
          if (r.forward && seen.insert(canonical_key(succ)).second)
            next.push_back(succ);
        }
      }
    }
    frontier = std::move(next);
  }
}

TEST_CASE("deletion severs remaining bonds but validation flags it") {
  // A hand-built rule that deletes a bound agent without unbinding:
  // apply_rule still defines the result, validate_rule refuses it.
  auto sigs = std::make_shared<SignatureTable>();
  sigs->agents.push_back({"S", {"l", "r"}, {{}, {}}});
  DirectedRule bad;
  bad.label = "drop";
  bad.lhs.sigs = sigs;
  int s0 = bad.lhs.add_agent(0);
  int s1 = bad.lhs.add_agent(0);
  bad.lhs.require_bond(s0, 1, s1, 0);
  bad.lhs.agents[s0].sites[0].link = LinkCk::kFree;
  bad.lhs.agents[s1].sites[1].link = LinkCk::kFree;
  bad.actions.push_back(ActDelete{SlotRef{false, s1}});
  CHECK_THROWS_AS(validate_rule(bad), ValidationError);

  SiteGraph g;
  g.sigs = sigs;
  g.add_agent(0);
  g.add_agent(0);
  g.bind(0, 1, 1, 0);
  SiteGraph after = apply_rule(bad, {0, 1}, g);
  after.validate();
  REQUIRE(after.agents.size() == 1);
  CHECK(!after.agents[0].bond[1].attached());
}

TEST_CASE("apply precondition violations raise") {
  Model m = parse_model(std::string(kDecl) +
                        "%rule: link S(r), S(l) -> S(r^1), S(l^1) @ 1, 1\n"
                        "%init: g S(l, r^1, x{a}), S(l^1, r, x{b})\n");
  // Force the rule at an embedding whose endpoints are occupied.
  const DirectedRule& fwd = m.rules[0];
  CHECK_THROWS_AS(apply_rule(fwd, {0, 1}, m.inits.at("g")), ApplyError);
}

TEST_CASE("petri transitions in both rate modes") {
  PetriModel pm = PetriModel::make(1.0, 0.5);
  // State (2, 0): two As, no B.
  SiteGraph g = pm.model.inits.at("start");
  g.add_agent(pm.a_sig);
  g.add_agent(pm.a_sig);

  auto unit = enumerate_transitions(g, pm.model.rules, RateMode::kUnitRate);
  CHECK(unit.size() == 3);  // create A, destroy A, flip A->B

  auto weighted =
      enumerate_transitions(g, pm.model.rules, RateMode::kEmbeddingWeighted);
  CHECK(weighted.size() == 5);  // destroy and flip get two embeddings each

  int destroy_entries = 0;
  for (const auto& t : weighted)
    if (!pm.model.rules[t.rule_index].forward &&
        pm.model.rules[t.rule_index].pair_name == "mkA")
      ++destroy_entries;
  CHECK(destroy_entries == 2);

  // No embeddings at all: the empty mixture only creates.
  auto none = enumerate_transitions(pm.model.inits.at("start"),
                                    pm.model.rules, RateMode::kUnitRate);
  CHECK(none.size() == 1);
}

TEST_CASE("state sets survive schema expansion in lockstep") {
  std::string text =
      "%agent: I(l, x{1, 2, 3, *})\n"
      "%agent: B(i)\n"
      "%rule: drop B(i^1), I(x{*}^1, l^2), I(l^2, x{1, 2, 3}) -> "
      "B(i^1), I(x{*}^1, l) @ 1, 0.5\n";
  Model m = parse_model(text);
  REQUIRE(m.pairs.size() == 1);
  // One named pair, three forward variants plus three reverses.
  CHECK(m.rules.size() == 6);
  std::set<std::string> labels;
  for (const auto& r : m.rules) labels.insert(r.label);
  CHECK(labels.count("drop#1"));
  CHECK(labels.count("drop#2_rev"));

  // Every variant pair restores the original graph.
  Model world = parse_model(
      "%agent: I(l, x{1, 2, 3, *})\n%agent: B(i)\n"
      "%init: g B(i^1), I(x{*}^1, l^2), I(l^2, x{2})\n");
  const SiteGraph& g = world.inits.at("g");
  int applied = 0;
  for (const auto& r : m.rules) {
    if (!r.forward) continue;
    for (const Embedding& e : find_embeddings(r.lhs, g)) {
      SiteGraph succ = apply_rule(r, e, g);
      ++applied;
      CHECK(r.label == "drop#2");  // only the matching variant fires
      const DirectedRule& rev = m.rules[r.reverse_index];
      bool restored = false;
      for (const Embedding& be : find_embeddings(rev.lhs, succ))
        if (canonical_key(apply_rule(rev, be, succ)) == canonical_key(g))
          restored = true;
      CHECK(restored);
    }
  }
  CHECK(applied == 1);
}

TEST_CASE("rules that lose track of a wildcard state are rejected") {
  // Deleting an agent whose unmentioned site might be bound.
  CHECK_THROWS_AS(
      parse_model(std::string(kDecl) + "%rule: bad S(x{a}) -> . @ 1, 1\n"),
      ParseError);
  // Creating an agent without a concrete state.
  CHECK_THROWS_AS(
      parse_model(std::string(kDecl) +
                  "%rule: bad2 . -> S(l, r, x) @ 1, 1\n"),
      ParseError);
}

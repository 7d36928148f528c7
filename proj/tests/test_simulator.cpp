#include <cmath>

#include "ctmceq/errors.hpp"
#include "ctmceq/explorer.hpp"
#include "ctmceq/simulator.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ctmceq;
using ctmceq::testing::default_params;
using ctmceq::testing::worked_instance;

TEST_CASE("zero budget yields an empty trajectory") {
  PetriModel pm = PetriModel::make(1.0, 0.5);
  SsaOptions opts;  // no event and no time budget
  auto traj = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts);
  CHECK(traj.events == 0);
  CHECK(traj.total_time == 0.0);
  CHECK(traj.occupancy.empty());
}

TEST_CASE("identical seeds give identical trajectories") {
  PetriModel pm = PetriModel::make(1.0, 0.5);
  SsaOptions opts;
  opts.seed = 77;
  opts.max_events = 2000;
  opts.record_events = true;
  auto key = [&pm](const SiteGraph& g) { return pm.count_key(g); };
  auto a = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts, key);
  auto b = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts, key);
  REQUIRE(a.event_log.size() == b.event_log.size());
  for (std::size_t k = 0; k < a.event_log.size(); ++k) {
    CHECK(a.event_log[k].time == b.event_log[k].time);
    CHECK(a.event_log[k].rule == b.event_log[k].rule);
    CHECK(a.event_log[k].post_key == b.event_log[k].post_key);
  }
  opts.seed = 78;
  auto c = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts, key);
  bool differs = c.event_log.size() != a.event_log.size();
  for (std::size_t k = 0; !differs && k < a.event_log.size(); ++k)
    differs = a.event_log[k].post_key != c.event_log[k].post_key ||
              a.event_log[k].time != c.event_log[k].time;
  CHECK(differs);
}

TEST_CASE("residence times account for the whole run") {
  PetriModel pm = PetriModel::make(1.0, 0.5);
  SsaOptions opts;
  opts.seed = 5;
  opts.max_events = 5000;
  auto traj = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts,
                      [&pm](const SiteGraph& g) { return pm.count_key(g); });
  double sum = 0.0;
  for (const auto& [k, w] : traj.occupancy) {
    (void)k;
    sum += w;
  }
  CHECK(sum == doctest::Approx(traj.total_time).epsilon(1e-9));
}

TEST_CASE("deadlock ends the run with a flag") {
  // Only a consuming rule and nothing to consume.
  auto sigs = std::make_shared<SignatureTable>();
  sigs->agents.push_back({"A", {}, {}});
  RulePairDecl eat;
  eat.name = "eat";
  eat.lhs.sigs = sigs;
  eat.rhs.sigs = sigs;
  eat.lhs.add_agent(0);
  eat.alignment = {{0, -1}};
  eat.fwd_rate = 1.0;
  Model m;
  m.sigs = sigs;
  m.pairs.push_back(eat);
  m.rebuild_rules();

  SiteGraph one;
  one.sigs = sigs;
  one.add_agent(0);

  SsaOptions opts;
  opts.max_events = 100;
  auto traj = ssa_run(one, m.rules, opts);
  CHECK(traj.deadlock);
  CHECK(traj.events == 1);  // the single deletion, then nothing
}

TEST_CASE("time budget truncates the final sojourn") {
  PetriModel pm = PetriModel::make(1.0, 0.5);
  SsaOptions opts;
  opts.seed = 11;
  opts.max_time = 25.0;
  auto traj = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts,
                      [&pm](const SiteGraph& g) { return pm.count_key(g); });
  CHECK(traj.total_time == doctest::Approx(25.0));
  double sum = 0.0;
  for (const auto& [k, w] : traj.occupancy) {
    (void)k;
    sum += w;
  }
  CHECK(sum == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("total variation distance") {
  std::map<std::string, double> emp{{"a", 3.0}, {"b", 1.0}};
  std::map<std::string, double> same{{"a", 0.75}, {"b", 0.25}};
  CHECK(compare_distribution(emp, same) == doctest::Approx(0.0));

  std::map<std::string, double> disjoint{{"c", 1.0}};
  CHECK(compare_distribution(emp, disjoint) == doctest::Approx(1.0));

  std::map<std::string, double> empty;
  CHECK_THROWS_AS(compare_distribution(empty, same), ValidationError);
}

TEST_CASE("closed form of the two-transition chain") {
  auto d = petri_closed_form(1.0, 0.5, 10, 10);
  double expected = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-1.5));
  CHECK(d.p.at("0,0") == doctest::Approx(expected).epsilon(1e-12));
  CHECK(d.p.at("0,0") == doctest::Approx(0.4911).epsilon(2e-4));
  CHECK(d.truncated_mass < 1e-3);
  CHECK(d.truncated_mass >= 0.0);

  auto sharp = petri_closed_form(30.0, 30.0, 5, 5);
  CHECK(sharp.p.at("0,0") > 1.0 - 1e-12);

  CHECK_THROWS_AS(petri_closed_form(-0.1, 0.5, 5, 5), ValidationError);
  CHECK_THROWS_AS(petri_closed_form(0.5, -0.6, 5, 5), ValidationError);
}

TEST_CASE("short unit-rate run approaches the closed form") {
  auto ex = run_petri_experiment(1.0, 0.5, 50000, 2024);
  CHECK(ex.tv < 0.1);
  CHECK(ex.predicted.truncated_mass < 1e-3);
  CHECK(!ex.top_edges.empty());
}

TEST_CASE("embedding-weighted sampling matches the product-Poisson law") {
  // With per-embedding propensities the birth/flip chain is an M/M/inf
  // pair: counts are independent Poisson with means e^{-e1} and
  // e^{-(e1+e2)}. The geometric law of the unit-rate semantics is
  // measurably different.
  PetriModel pm = PetriModel::make(1.0, 0.5);
  SsaOptions opts;
  opts.seed = 42;
  opts.max_events = 200000;
  opts.mode = RateMode::kEmbeddingWeighted;
  auto traj = ssa_run(pm.model.inits.at("start"), pm.model.rules, opts,
                      [&pm](const SiteGraph& g) { return pm.count_key(g); });

  double lam_a = std::exp(-1.0);
  double lam_b = std::exp(-1.5);
  auto poisson = [](double lam, int k) {
    double p = std::exp(-lam);
    for (int i = 1; i <= k; ++i) p *= lam / i;
    return p;
  };
  std::map<std::string, double> product;
  for (int n = 0; n <= 12; ++n)
    for (int m = 0; m <= 12; ++m)
      product[std::to_string(n) + "," + std::to_string(m)] =
          poisson(lam_a, n) * poisson(lam_b, m);

  double tv_pois = compare_distribution(traj.occupancy, product);
  CHECK(tv_pois < 0.05);

  auto geometric = petri_closed_form(1.0, 0.5, 12, 12);
  double tv_geo = compare_distribution(traj.occupancy, geometric.p);
  CHECK(tv_geo > tv_pois + 0.02);  // the two semantics really differ
}

TEST_CASE("pcp propensities agree across rate modes along a trajectory") {
  Encoding enc = compile(worked_instance(), default_params(), true);
  SiteGraph g = enc.initial();
  std::mt19937_64 rng(9);
  for (int step = 0; step < 60; ++step) {
    auto unit = enumerate_propensities(g, enc.model.rules, RateMode::kUnitRate);
    auto weighted = enumerate_propensities(g, enc.model.rules,
                                           RateMode::kEmbeddingWeighted);
    REQUIRE(unit.size() == weighted.size());  // one embedding per rule
    double total = 0.0;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      CHECK(unit[k].rule_index == weighted[k].rule_index);
      CHECK(unit[k].rate == weighted[k].rate);
      total += unit[k].rate;
    }
    REQUIRE(total > 0.0);
    double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t chosen = 0;
    double acc = 0.0;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      acc += unit[k].rate;
      if (pick < acc) {
        chosen = k;
        break;
      }
    }
    g = apply_rule(enc.model.rules[unit[chosen].rule_index],
                   unit[chosen].embedding, g);
  }
}

TEST_CASE("the worked instance hits a success state") {
  Encoding enc = compile(worked_instance(), default_params(), true);
  EncodingIds ids = encoding_ids(*enc.model.sigs);
  SsaOptions opts;
  opts.seed = 31337;
  opts.max_events = 10000000;
  opts.mode = RateMode::kEmbeddingWeighted;
  opts.stop_when_flagged = true;
  auto traj = ssa_run(
      enc.initial(), enc.model.rules, opts, nullptr,
      [&ids](const SiteGraph& g) { return graph_is_success(g, ids); });
  CHECK(traj.flagged_hits >= 1);
  CHECK(traj.events < opts.max_events);
}

#include "ctmceq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ctmceq/errors.hpp"

namespace ctmceq {

namespace {

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa in [0,1); stable across platforms for one build.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Trajectory ssa_run(const SiteGraph& init, const std::vector<DirectedRule>& rules,
                   const SsaOptions& opts, const StateKeyFn& key_fn,
                   const StateFlagFn& flag) {
  Trajectory out;
  out.seed = opts.seed;
  if (opts.max_events == 0 && opts.max_time <= 0.0) return out;

  StateKeyFn key_of = key_fn ? key_fn : [](const SiteGraph& g) {
    return canonical_key(g);
  };

  std::mt19937_64 rng(opts.seed);
  SiteGraph g = init;
  std::string key = key_of(g);
  out.visits[key] += 1;
  if (flag && flag(g)) out.flagged_hits += 1;
  double t = 0.0;

  while (true) {
    if (opts.max_events > 0 && out.events >= opts.max_events) break;

    auto channels = enumerate_propensities(g, rules, opts.mode);
    double total = 0.0;
    for (const PropensityEntry& c : channels) total += c.rate;
    if (total <= 0.0) {
      out.deadlock = true;
      if (opts.max_time > 0.0 && t < opts.max_time) {
        out.occupancy[key] += opts.max_time - t;
        t = opts.max_time;
      }
      break;
    }

    double dt = -std::log1p(-uniform01(rng)) / total;
    if (opts.max_time > 0.0 && t + dt > opts.max_time) {
      out.occupancy[key] += opts.max_time - t;
      t = opts.max_time;
      break;
    }
    out.occupancy[key] += dt;
    t += dt;

    double pick = uniform01(rng) * total;
    std::size_t chosen = 0;
    double acc = 0.0;
    for (std::size_t k = 0; k < channels.size(); ++k) {
      acc += channels[k].rate;
      if (pick < acc) {
        chosen = k;
        break;
      }
      chosen = k;  // guard against rounding at the upper end
    }

    const PropensityEntry& c = channels[chosen];
    g = apply_rule(rules[c.rule_index], c.embedding, g);
    std::string post = key_of(g);
    out.events += 1;
    out.visits[post] += 1;
    if (opts.track_flux) out.flux[{key, post}] += 1;
    if (opts.record_events)
      out.event_log.push_back({t, rules[c.rule_index].label, key, post});
    key = std::move(post);
    if (flag && flag(g)) {
      out.flagged_hits += 1;
      if (opts.stop_when_flagged) break;
    }
  }
  out.total_time = t;
  return out;
}

double compare_distribution(const std::map<std::string, double>& occupancy,
                            const std::map<std::string, double>& predicted) {
  double total = 0.0;
  for (const auto& [k, w] : occupancy) {
    (void)k;
    total += w;
  }
  if (total <= 0.0)
    throw ValidationError("compare_distribution: empty occupancy");
  double tv = 0.0;
  for (const auto& [k, w] : occupancy) {
    auto it = predicted.find(k);
    double q = it == predicted.end() ? 0.0 : it->second;
    tv += std::abs(w / total - q);
  }
  for (const auto& [k, q] : predicted)
    if (!occupancy.count(k)) tv += q;
  return tv / 2.0;
}

PetriModel PetriModel::make(double e1, double e2, double base_rate) {
  PetriModel pm;
  pm.e1 = e1;
  pm.e2 = e2;

  auto sigs = std::make_shared<SignatureTable>();
  sigs->agents.push_back({"A", {}, {}});
  sigs->agents.push_back({"B", {}, {}});
  pm.a_sig = 0;
  pm.b_sig = 1;

  Model& m = pm.model;
  m.sigs = sigs;
  {
    SiteGraph empty;
    empty.sigs = sigs;
    m.inits["start"] = empty;
  }
  {
    RulePairDecl make_a;
    make_a.name = "mkA";
    make_a.lhs.sigs = sigs;
    make_a.rhs.sigs = sigs;
    make_a.rhs.add_agent(pm.a_sig);
    make_a.alignment = {{-1, 0}};
    make_a.fwd_rate = base_rate;
    make_a.bwd_rate = base_rate * std::exp(e1);
    make_a.delta_e = e1;
    m.pairs.push_back(std::move(make_a));
  }
  {
    RulePairDecl flip;
    flip.name = "flip";
    flip.lhs.sigs = sigs;
    flip.rhs.sigs = sigs;
    flip.lhs.add_agent(pm.a_sig);
    flip.rhs.add_agent(pm.b_sig);
    flip.alignment = {{0, 0}};
    flip.fwd_rate = base_rate;
    flip.bwd_rate = base_rate * std::exp(e2);
    flip.delta_e = e2;
    m.pairs.push_back(std::move(flip));
  }
  m.rebuild_rules();
  return pm;
}

std::string PetriModel::count_key(const SiteGraph& g) const {
  int n = 0, m = 0;
  for (const Agent& a : g.agents) {
    if (a.sig == a_sig) ++n;
    if (a.sig == b_sig) ++m;
  }
  return std::to_string(n) + "," + std::to_string(m);
}

PetriDistribution petri_closed_form(double e1, double e2, int n_max,
                                    int m_max) {
  if (!(e1 > 0.0) || !(e1 + e2 > 0.0))
    throw ValidationError(
        "petri closed form needs e1 > 0 and e1 + e2 > 0; the partition "
        "function diverges otherwise");
  PetriDistribution d;
  double ra = std::exp(-e1);            // per extra A
  double rb = std::exp(-(e1 + e2));     // per extra B
  d.z = 1.0 / ((1.0 - ra) * (1.0 - rb));
  double grid = 0.0;
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= m_max; ++m) {
      double p = std::pow(ra, n) * std::pow(rb, m) / d.z;
      d.p[std::to_string(n) + "," + std::to_string(m)] = p;
      grid += p;
    }
  d.truncated_mass = 1.0 - grid;
  return d;
}

PetriExperiment run_petri_experiment(double e1, double e2,
                                     std::uint64_t events, std::uint64_t seed,
                                     RateMode mode, int n_max, int m_max) {
  PetriExperiment ex;
  PetriModel pm = PetriModel::make(e1, e2);

  SsaOptions opts;
  opts.seed = seed;
  opts.max_events = events;
  opts.mode = mode;
  opts.track_flux = true;
  ex.trajectory =
      ssa_run(pm.model.inits.at("start"), pm.model.rules, opts,
              [&pm](const SiteGraph& g) { return pm.count_key(g); });

  ex.predicted = petri_closed_form(e1, e2, n_max, m_max);
  ex.tv = compare_distribution(ex.trajectory.occupancy, ex.predicted.p);

  // Rank unordered pairs by traversal count.
  std::map<std::pair<std::string, std::string>, std::pair<std::uint64_t, std::uint64_t>>
      pairs;
  for (const auto& [edge, cnt] : ex.trajectory.flux) {
    if (edge.first <= edge.second)
      pairs[{edge.first, edge.second}].first += cnt;
    else
      pairs[{edge.second, edge.first}].second += cnt;
  }
  for (const auto& [edge, counts] : pairs) {
    PetriExperiment::FluxEdge fe;
    fe.a = edge.first;
    fe.b = edge.second;
    fe.forward = counts.first;
    fe.backward = counts.second;
    fe.asymmetry = events == 0
                       ? 0.0
                       : std::abs(static_cast<double>(fe.forward) -
                                  static_cast<double>(fe.backward)) /
                             static_cast<double>(events);
    ex.top_edges.push_back(fe);
  }
  std::sort(ex.top_edges.begin(), ex.top_edges.end(),
            [](const auto& x, const auto& y) {
              return x.forward + x.backward > y.forward + y.backward;
            });
  if (ex.top_edges.size() > 10) ex.top_edges.resize(10);
  for (const auto& fe : ex.top_edges)
    ex.max_asymmetry_top10 = std::max(ex.max_asymmetry_top10, fe.asymmetry);
  return ex;
}

}  // namespace ctmceq

#ifndef CTMCEQ_SIMULATOR_HPP
#define CTMCEQ_SIMULATOR_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ctmceq/rules.hpp"

namespace ctmceq {

struct SsaOptions {
  std::uint64_t seed = 0;
  std::uint64_t max_events = 0;  // 0 = no event budget
  double max_time = 0.0;         // 0 = no time budget
  RateMode mode = RateMode::kUnitRate;
  bool record_events = false;
  bool track_flux = false;
  bool stop_when_flagged = false;  // end the run on the first flagged state
};

struct SsaEvent {
  double time;
  std::string rule;
  std::string pre_key, post_key;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  double total_time = 0.0;
  bool deadlock = false;
  std::map<std::string, double> occupancy;  // state key -> residence time
  std::map<std::string, std::uint64_t> visits;
  std::map<std::pair<std::string, std::string>, std::uint64_t> flux;
  std::vector<SsaEvent> event_log;
  std::uint64_t flagged_hits = 0;  // visits to states the flag accepts
};

using StateKeyFn = std::function<std::string(const SiteGraph&)>;
using StateFlagFn = std::function<bool(const SiteGraph&)>;

/// Direct-method jump sampling with full propensity recomputation per
/// jump: exponential waiting time at the total propensity, the jump
/// chosen proportionally. Identical seed, identical trajectory.
/// Runs until the event budget, the time budget, or a deadlock (no
/// enabled transition; flagged, the run ends there).
Trajectory ssa_run(const SiteGraph& init, const std::vector<DirectedRule>& rules,
                   const SsaOptions& opts, const StateKeyFn& key_fn = nullptr,
                   const StateFlagFn& flag = nullptr);

/// Total-variation distance between the residence-time estimate and a
/// prediction; states absent from one side count with probability 0.
double compare_distribution(const std::map<std::string, double>& occupancy,
                            const std::map<std::string, double>& predicted);

/// Two reversible transitions: creation of an A, and flipping an A
/// into a B. Rates realize the two creation energy differences: the
/// pair ratios are e^{e1} and e^{e2}.
struct PetriModel {
  double e1 = 1.0, e2 = 0.5;
  Model model;  // agents A(), B(); init "start" is the empty mixture
  int a_sig = -1, b_sig = -1;

  static PetriModel make(double e1, double e2, double base_rate = 1.0);
  std::string count_key(const SiteGraph& g) const;  // "n,m"
};

struct PetriDistribution {
  std::map<std::string, double> p;  // "n,m" -> probability (full-Z weights)
  double z = 0.0;
  double truncated_mass = 0.0;  // 1 - sum over the grid
};

/// p(n,m) on the grid n <= n_max, m <= m_max with the exact partition
/// value of the untruncated chain. Requires e1 > 0 and e1 + e2 > 0;
/// throws ValidationError otherwise (the partition function diverges).
PetriDistribution petri_closed_form(double e1, double e2, int n_max, int m_max);

struct PetriExperiment {
  Trajectory trajectory;
  PetriDistribution predicted;
  double tv = 0.0;
  // Unordered state pairs ranked by traversal count, with the flux
  // asymmetry |forward - backward| / events for each.
  struct FluxEdge {
    std::string a, b;
    std::uint64_t forward = 0, backward = 0;
    double asymmetry = 0.0;
  };
  std::vector<FluxEdge> top_edges;
  double max_asymmetry_top10 = 0.0;
};

PetriExperiment run_petri_experiment(double e1, double e2,
                                     std::uint64_t events, std::uint64_t seed,
                                     RateMode mode = RateMode::kUnitRate,
                                     int n_max = 10, int m_max = 10);

}  // namespace ctmceq

#endif

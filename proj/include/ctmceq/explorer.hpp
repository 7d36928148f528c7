#ifndef CTMCEQ_EXPLORER_HPP
#define CTMCEQ_EXPLORER_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctmceq/pcp.hpp"
#include "ctmceq/rate_graph.hpp"

namespace ctmceq {

struct LabeledTransition {
  std::string label;
  bool forward = true;
  double rate = 0.0;
  double delta_e = 0.0;
  std::string succ_key;
  int succ_n = 0;
};

struct ExpandedState {
  int n_value = 0;
  bool success = false;
  bool empty_chain_above_dummy = false;
  std::vector<LabeledTransition> out;  // both orientations
};

/// Uniform view over the two state spaces (site-graph encoding and
/// the abstract oracle). expand() is safe to call concurrently.
class StateSpace {
 public:
  virtual ~StateSpace() = default;
  virtual std::string initial_key() = 0;
  virtual ExpandedState expand(const std::string& key) = 0;
};

class EncodingSpace : public StateSpace {
 public:
  explicit EncodingSpace(const Encoding& enc);
  std::string initial_key() override;
  ExpandedState expand(const std::string& key) override;

 private:
  const Encoding& enc_;
  EncodingIds ids_;
  std::mutex mu_;
  std::unordered_map<std::string, SiteGraph> memo_;
};

class OracleSpace : public StateSpace {
 public:
  OracleSpace(const PcpInstance& x, const EncodingParams& p, bool extended);
  std::string initial_key() override;
  ExpandedState expand(const std::string& key) override;

 private:
  PcpInstance x_;
  EncodingParams p_;
  bool extended_;
  std::mutex mu_;
  std::unordered_map<std::string, AbstractState> memo_;
};

struct ExploreConfig {
  int bound = 4;                 // max non-dummy index-chain length
  std::size_t state_cap = 1000000;
  int threads = 1;
};

/// Bounded closure of the initial state. Discovery follows forward
/// rules only (every ordinarily reachable configuration is forward
/// reachable); edges are then completed in both directions between
/// included states, so rule pairs keep the support symmetric under
/// truncation by state.
struct TruncatedChain {
  RateGraph graph;            // states keyed by canonical key
  std::vector<int> n_value;   // per state
  int bound = 0;
  bool capped = false;
  std::vector<std::string> frontier;   // out-of-bound forward successors
  std::vector<int> success_states;
  std::vector<int> review_states;      // empty chain above a real index
  // Per directed edge: contributing (rule label, rate) entries.
  std::map<std::pair<int, int>, std::vector<std::pair<std::string, double>>>
      edge_contribs;
};

TruncatedChain explore(StateSpace& space, const ExploreConfig& cfg);

struct EquilibriumReport {
  bool violation = false;
  EnergyAssignment assignment;  // valid when !violation
  CycleWitness witness;         // oriented so energy_sum > 0
  bool traverses_switch2 = false;
  std::string note;
};

/// Wegscheider check on the truncated chain. A violation found within
/// the bound certifies one on the full chain; absence of violation is
/// conclusive only for cycles inside the bound.
EquilibriumReport check_equilibrium(const TruncatedChain& t, double tol = 1e-9);

struct LevelCensus {
  std::map<int, std::size_t> counts;   // explored states per level
  std::map<int, double> bounds;        // (n+1) * pairs^n
  std::vector<int> exceeded;           // levels where count > bound
};

LevelCensus level_census(const TruncatedChain& t, int n_pairs);

struct PartitionReport {
  std::vector<double> partial_sums;  // cumulative over n = 0..bound
  double tail_bound = 0.0;           // +inf when the series diverges
  std::string verdict;  // "violation-found" | "converges" | "divergence-suspected"
};

PartitionReport partition_sum(const LevelCensus& census, int bound,
                              double epsilon, int n_pairs,
                              bool violation_found);

/// Whole pipeline behind the `check` subcommand: compile (extended),
/// explore, equilibrium check, census, partition report.
struct CheckReport {
  PcpInstance instance;
  EncodingParams params;
  int bound = 0;
  std::string source;  // "encoding" | "oracle"
  TruncatedChain chain;
  EquilibriumReport equilibrium;
  LevelCensus census;
  PartitionReport partition;
  std::vector<std::string> warnings;
};

CheckReport run_check(const PcpInstance& x, const EncodingParams& p, int bound,
                      std::size_t state_cap = 1000000,
                      bool use_oracle = false, int threads = 1);

std::string check_report_to_json(const CheckReport& r);
std::string chain_to_dot(const TruncatedChain& t);
std::string census_to_csv(const LevelCensus& c);

}  // namespace ctmceq

#endif

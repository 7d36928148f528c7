#ifndef CTMCEQ_RATE_GRAPH_HPP
#define CTMCEQ_RATE_GRAPH_HPP

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace ctmceq {

/// Finite sparse transition graph with strictly positive rates.
/// States are opaque keys; edges are directed with no self-loops.
/// Values are immutable in spirit: build once, then share read-only.
class RateGraph {
 public:
  int add_state(const std::string& key);
  int state_id(const std::string& key) const;  // -1 when absent
  const std::string& key_of(int id) const { return states_.at(id); }
  const std::vector<std::string>& states() const { return states_; }
  int num_states() const { return static_cast<int>(states_.size()); }

  /// Accumulates parallel contributions onto one edge. Rejects
  /// self-loops and non-positive rates.
  void add_rate(int from, int to, double rate);

  bool has_edge(int from, int to) const;
  double rate(int from, int to) const;  // 0 when absent
  const std::map<std::pair<int, int>, double>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }

 private:
  std::vector<std::string> states_;
  std::unordered_map<std::string, int> index_;
  std::map<std::pair<int, int>, double> edges_;
};

/// BFS spanning forest, rooted at the lowest-indexed state of each
/// connected component (edges taken as undirected support).
struct SpanningForest {
  std::vector<int> parent;      // -1 at roots
  std::vector<int> depth;
  std::vector<int> component;   // component id per state
  std::vector<int> roots;       // root state per component
  std::vector<int> bfs_order;   // discovery order

  bool is_tree_pair(int i, int j) const {
    return parent[i] == j || parent[j] == i;
  }
};

struct EnergyAssignment {
  std::vector<double> energy;     // per state
  std::vector<int> component;     // per state
  std::vector<int> reference;     // per component: the pinned state
  int num_components = 0;
};

struct CycleEdge {
  int from = -1;
  int to = -1;
  bool operator==(const CycleEdge&) const = default;
};

struct CycleWitness {
  std::vector<CycleEdge> path;  // closed: target of last = source of first
  double energy_sum = 0.0;
};

using SolveResult = std::variant<EnergyAssignment, CycleWitness>;

struct Distribution {
  std::vector<double> p;  // per state, sums to 1
  double z = 0.0;         // partition value after the per-component shift
};

struct DetailedBalanceReport {
  double max_residual = 0.0;
  int worst_from = -1;
  int worst_to = -1;
  bool pass = true;
};

/// nullopt when every edge has its reverse; otherwise the first
/// offending edge in edge-map order.
std::optional<std::pair<int, int>> check_symmetric_support(const RateGraph& g);

/// Energy step along an edge: ln(q_ji / q_ij). Throws ApplyError when
/// either direction is missing.
double edge_delta_e(const RateGraph& g, int i, int j);

/// Sum of edge_delta_e along a contiguous path (empty path -> 0).
double path_delta_e(const RateGraph& g, const std::vector<CycleEdge>& path);

SpanningForest spanning_forest(const RateGraph& g);

/// Tree-based energy solve. Pins default to 0 at each component's BFS
/// root; `pins` may designate one state per component instead. Returns
/// the assignment, or the first fundamental cycle whose energy sum
/// exceeds tol. Throws SupportError on asymmetric support.
SolveResult solve_energy(const RateGraph& g,
                         const std::map<int, double>& pins = {},
                         double tol = 1e-9);

/// Boltzmann weights from an assignment. Energies are shifted by the
/// per-component minimum before exponentiation, so z follows that
/// convention (each component's lowest state contributes weight 1).
Distribution boltzmann(const EnergyAssignment& e);

DetailedBalanceReport verify_detailed_balance(const Distribution& p,
                                              const RateGraph& g,
                                              double tol = 1e-9);

std::string rate_graph_to_json(const RateGraph& g);
RateGraph rate_graph_from_json(const std::string& text);
std::string rate_graph_to_dot(const RateGraph& g);

}  // namespace ctmceq

#endif

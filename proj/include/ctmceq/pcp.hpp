#ifndef CTMCEQ_PCP_HPP
#define CTMCEQ_PCP_HPP

#include <string>
#include <vector>

#include "ctmceq/parser.hpp"
#include "ctmceq/rules.hpp"

namespace ctmceq {

/// A correspondence instance: ordered pairs of non-empty words over a
/// finite alphabet of single-character symbols.
struct PcpInstance {
  std::vector<std::string> alphabet;
  std::vector<std::pair<std::string, std::string>> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  const std::string& u(int i) const { return pairs[i - 1].first; }   // 1-based
  const std::string& v(int i) const { return pairs[i - 1].second; }
  void validate() const;

  static PcpInstance from_json(const std::string& text);
  std::string to_json() const;
};

struct EncodingParams {
  double epsilon = 1.0;   // energy quantum per recorded index
  double e_switch = 1.0;  // second-switch energy difference
  double base_rate = 1.0; // forward rate unit

  /// Advisory checks; returns human-readable warnings.
  std::vector<std::string> validate(int n_pairs) const;

  static EncodingParams from_json(const std::string& text);
  std::string to_json() const;
};

/// Compiled rewriting system. Pair rates realize the declared energy
/// differences: forward = base_rate, backward = base_rate * e^{dE}.
struct Encoding {
  PcpInstance instance;
  EncodingParams params;
  bool extended = false;
  Model model;
  std::vector<std::string> warnings;

  const SiteGraph& initial() const { return model.inits.at("start"); }
};

Encoding compile(const PcpInstance& x, const EncodingParams& p, bool extended);

/// Cached agent/site/state ids of the four encoding signatures.
struct EncodingIds {
  int f_sig, b_sig, s_sig, i_sig;
  int head_s, head_i;      // sites of F/B
  int chain_l, chain_r, chain_x;  // sites of S and I (shared layout)
  int s_star, i_star;      // dummy state ids on S.x / I.x
};
EncodingIds encoding_ids(const SignatureTable& sigs);

/// Number of non-dummy index agents (the state's energy level).
int count_real_indices(const SiteGraph& g, const EncodingIds& ids);
/// Backward agent holding both dummies: the success anchor.
bool graph_is_success(const SiteGraph& g, const EncodingIds& ids);
/// Backward agent with an empty symbol chain but a real index under
/// its head: reported for review, never classified.
bool graph_empty_chain_above_dummy(const SiteGraph& g, const EncodingIds& ids);

/// Independent model of the encoding's configurations. The symbol
/// chain is stored explicitly: after a success, reverse erase steps
/// can rebuild chains that no longer equal the usual derived value.
struct AbstractState {
  enum class Mode { kForward, kBackward };
  Mode mode = Mode::kForward;
  std::vector<int> log;  // recorded indices, bottom first (1-based values)
  int pos = 0;           // backward head position, 0 = at the dummy
  std::string chain;     // symbol chain

  bool operator==(const AbstractState&) const = default;
};

AbstractState abstract_initial();
std::string abstract_key(const AbstractState& s);
bool is_success(const AbstractState& s);
/// Throws ValidationError when the state breaks the model invariants
/// (pos out of range, unknown indices, forward state with pos != 0).
void check_abstract_state(const AbstractState& s, const PcpInstance& x);

struct OracleTransition {
  std::string label;  // rule pair name + variant, "_rev" when backward
  bool forward = true;
  double rate = 0.0;
  double delta_e = 0.0;
  AbstractState succ;
};

/// Exact transition list of the abstract model, ordered like the
/// compiled rule set (all forward rules, then all backward ones).
std::vector<OracleTransition> oracle_transitions(const AbstractState& s,
                                                 const PcpInstance& x,
                                                 const EncodingParams& p,
                                                 bool extended);

/// Exhaustive bounded search with prefix pruning; all index sequences
/// f, 1 <= |f| <= max_len, whose word concatenations agree, ordered by
/// (length, lexicographic).
std::vector<std::vector<int>> solve_pcp_bounded(const PcpInstance& x,
                                                int max_len);

}  // namespace ctmceq

#endif

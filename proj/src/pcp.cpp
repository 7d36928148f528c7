#include "ctmceq/pcp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ctmceq/errors.hpp"
#include "json.hpp"

namespace ctmceq {

void PcpInstance::validate() const {
  if (alphabet.empty()) throw ValidationError("alphabet must be non-empty");
  if (pairs.empty()) throw ValidationError("instance needs at least one pair");
  std::set<std::string> seen;
  for (const std::string& s : alphabet) {
    if (s.size() != 1)
      throw ValidationError("alphabet symbols must be single characters");
    if (s == "*") throw ValidationError("'*' is reserved for the dummy state");
    if (!seen.insert(s).second)
      throw ValidationError("alphabet symbol '" + s + "' repeated");
  }
  for (const auto& [u, v] : pairs) {
    if (u.empty() || v.empty())
      throw ValidationError("words must be non-empty");
    for (char ch : u + v)
      if (!seen.count(std::string(1, ch)))
        throw ValidationError(std::string("word symbol '") + ch +
                              "' not in the alphabet");
  }
}

PcpInstance PcpInstance::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PcpInstance x;
  for (const auto& s : j.at("alphabet")) x.alphabet.push_back(s.get<std::string>());
  for (const auto& p : j.at("pairs"))
    x.pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
  x.validate();
  return x;
}

std::string PcpInstance::to_json() const {
  nlohmann::json j;
  j["alphabet"] = alphabet;
  auto& ps = j["pairs"] = nlohmann::json::array();
  for (const auto& [u, v] : pairs) ps.push_back({u, v});
  return j.dump(2);
}

std::vector<std::string> EncodingParams::validate(int n_pairs) const {
  std::vector<std::string> warnings;
  if (!(base_rate > 0.0))
    throw ValidationError("base_rate must be strictly positive");
  if (std::abs(e_switch + epsilon) < 1e-12)
    warnings.push_back(
        "e_switch = -epsilon makes the second switch energy-compatible; "
        "solvable and unsolvable instances become indistinguishable");
  if (epsilon <= std::log(static_cast<double>(n_pairs)))
    warnings.push_back(
        "epsilon <= ln(number of pairs): the partition tail bound diverges");
  return warnings;
}

EncodingParams EncodingParams::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EncodingParams p;
  p.epsilon = j.at("epsilon").get<double>();
  p.e_switch = j.at("e_switch").get<double>();
  p.base_rate = j.value("base_rate", 1.0);
  return p;
}

std::string EncodingParams::to_json() const {
  nlohmann::json j;
  j["epsilon"] = epsilon;
  j["e_switch"] = e_switch;
  j["base_rate"] = base_rate;
  return j.dump(2);
}

EncodingIds encoding_ids(const SignatureTable& sigs) {
  EncodingIds ids;
  ids.f_sig = sigs.agent_index("F");
  ids.b_sig = sigs.agent_index("B");
  ids.s_sig = sigs.agent_index("S");
  ids.i_sig = sigs.agent_index("I");
  if (ids.f_sig < 0 || ids.b_sig < 0 || ids.s_sig < 0 || ids.i_sig < 0)
    throw ValidationError("model lacks the F/B/S/I encoding signatures");
  ids.head_s = sigs.at(ids.f_sig).site_index("s");
  ids.head_i = sigs.at(ids.f_sig).site_index("i");
  ids.chain_l = sigs.at(ids.s_sig).site_index("l");
  ids.chain_r = sigs.at(ids.s_sig).site_index("r");
  ids.chain_x = sigs.at(ids.s_sig).site_index("x");
  ids.s_star = sigs.at(ids.s_sig).state_index(ids.chain_x, "*");
  ids.i_star = sigs.at(ids.i_sig).state_index(ids.chain_x, "*");
  return ids;
}

namespace {

// Rule-pair construction works on pattern pairs with positional
// alignment, the same shape the textual language produces.

struct PairBuilder {
  SigPtr sigs;
  EncodingIds ids;
  RulePairDecl decl;
  int bond = 1;

  PairBuilder(SigPtr s, const EncodingIds& i, std::string name) : sigs(s), ids(i) {
    decl.name = std::move(name);
    decl.lhs.sigs = s;
    decl.rhs.sigs = s;
  }

  static void set_state(Pattern& p, int slot, int site, int state) {
    p.agents[slot].sites[site].any_state = false;
    p.agents[slot].sites[site].allowed = {state};
  }
  static void set_states(Pattern& p, int slot, int site, std::vector<int> states) {
    p.agents[slot].sites[site].any_state = false;
    std::sort(states.begin(), states.end());
    p.agents[slot].sites[site].allowed = std::move(states);
  }
  static void set_free(Pattern& p, int slot, int site) {
    p.agents[slot].sites[site].link = LinkCk::kFree;
  }
};

}  // namespace

Encoding compile(const PcpInstance& x, const EncodingParams& p, bool extended) {
  x.validate();
  Encoding enc;
  enc.instance = x;
  enc.params = p;
  enc.extended = extended;
  enc.warnings = p.validate(x.size());

  int n = x.size();
  auto sigs = std::make_shared<SignatureTable>();
  {
    AgentSignature f{"F", {"s", "i"}, {{}, {}}};
    AgentSignature b{"B", {"s", "i"}, {{}, {}}};
    std::vector<std::string> sym_dom = x.alphabet;
    sym_dom.push_back("*");
    AgentSignature s{"S", {"l", "r", "x"}, {{}, {}, sym_dom}};
    std::vector<std::string> idx_dom;
    for (int i = 1; i <= n; ++i) idx_dom.push_back(std::to_string(i));
    idx_dom.push_back("*");
    AgentSignature ia{"I", {"l", "r", "x"}, {{}, {}, idx_dom}};
    sigs->agents = {f, b, s, ia};
  }
  EncodingIds ids = encoding_ids(*sigs);

  auto state_id = [&](int sig, const std::string& sym) {
    return sigs->at(sig).state_index(ids.chain_x, sym);
  };
  std::vector<int> real_indices;
  for (int i = 1; i <= n; ++i)
    real_indices.push_back(state_id(ids.i_sig, std::to_string(i)));

  double q = p.base_rate;
  Model& m = enc.model;
  m.sigs = sigs;

  // Initial state: the head agent holding one dummy symbol agent and
  // one dummy index agent.
  {
    SiteGraph g;
    g.sigs = sigs;
    int f = g.add_agent(ids.f_sig);
    int s = g.add_agent(ids.s_sig);
    int i = g.add_agent(ids.i_sig);
    g.agents[s].state[ids.chain_x] = ids.s_star;
    g.agents[i].state[ids.chain_x] = ids.i_star;
    g.bind(f, ids.head_s, s, ids.chain_x);
    g.bind(f, ids.head_i, i, ids.chain_x);
    m.inits["start"] = std::move(g);
  }

  // F-rules: extend the symbol chain by u_i, record i on the index
  // chain, move the head to the new tails.
  for (int i = 1; i <= n; ++i) {
    PairBuilder b(sigs, ids, "F" + std::to_string(i));
    const std::string& u = x.u(i);
    int L = static_cast<int>(u.size());

    Pattern& lhs = b.decl.lhs;
    int lf = lhs.add_agent(ids.f_sig);
    int ls = lhs.add_agent(ids.s_sig);
    int li = lhs.add_agent(ids.i_sig);
    lhs.require_bond(lf, ids.head_s, ls, ids.chain_x);
    lhs.require_bond(lf, ids.head_i, li, ids.chain_x);
    PairBuilder::set_free(lhs, ls, ids.chain_r);
    PairBuilder::set_free(lhs, li, ids.chain_r);

    Pattern& rhs = b.decl.rhs;
    int rf = rhs.add_agent(ids.f_sig);
    int rs = rhs.add_agent(ids.s_sig);
    int ri = rhs.add_agent(ids.i_sig);
    std::vector<int> block;
    for (int k = 0; k < L; ++k) {
      int a = rhs.add_agent(ids.s_sig);
      PairBuilder::set_state(rhs, a, ids.chain_x,
                             state_id(ids.s_sig, std::string(1, u[k])));
      block.push_back(a);
    }
    int rnew = rhs.add_agent(ids.i_sig);
    PairBuilder::set_state(rhs, rnew, ids.chain_x, real_indices[i - 1]);

    PairBuilder::set_free(rhs, rs, ids.chain_x);
    rhs.require_bond(rs, ids.chain_r, block[0], ids.chain_l);
    for (int k = 0; k + 1 < L; ++k)
      rhs.require_bond(block[k], ids.chain_r, block[k + 1], ids.chain_l);
    PairBuilder::set_free(rhs, block[L - 1], ids.chain_r);
    rhs.require_bond(rf, ids.head_s, block[L - 1], ids.chain_x);
    for (int k = 1; k < L; ++k)
      PairBuilder::set_free(rhs, block[k - 1], ids.chain_x);

    PairBuilder::set_free(rhs, ri, ids.chain_x);
    rhs.require_bond(ri, ids.chain_r, rnew, ids.chain_l);
    PairBuilder::set_free(rhs, rnew, ids.chain_r);
    rhs.require_bond(rf, ids.head_i, rnew, ids.chain_x);

    b.decl.alignment = {{0, 0}, {1, 1}, {2, 2}};
    for (int k = 0; k < L; ++k) b.decl.alignment.push_back({-1, block[k]});
    b.decl.alignment.push_back({-1, rnew});
    b.decl.fwd_rate = q;
    b.decl.bwd_rate = q * std::exp(p.epsilon);
    b.decl.delta_e = p.epsilon;
    m.pairs.push_back(std::move(b.decl));
  }

  // First switch: the head may flip once the index chain is real.
  {
    PairBuilder b(sigs, ids, "switch1");
    for (bool left : {true, false}) {
      Pattern& side = left ? b.decl.lhs : b.decl.rhs;
      int head = side.add_agent(left ? ids.f_sig : ids.b_sig);
      int s = side.add_agent(ids.s_sig);
      int i = side.add_agent(ids.i_sig);
      side.require_bond(head, ids.head_s, s, ids.chain_x);
      side.require_bond(head, ids.head_i, i, ids.chain_x);
      PairBuilder::set_free(side, s, ids.chain_r);
      PairBuilder::set_free(side, i, ids.chain_r);
      PairBuilder::set_states(side, i, ids.chain_x, real_indices);
    }
    b.decl.alignment = {{0, 0}, {1, 1}, {2, 2}};
    b.decl.fwd_rate = q;
    b.decl.bwd_rate = q;
    b.decl.delta_e = 0.0;
    m.pairs.push_back(std::move(b.decl));
  }

  // B-rules: consume v_i from the symbol tail when the head sits on an
  // index agent carrying i; the head steps one index down. The index
  // chain itself is never erased here.
  for (int i = 1; i <= n; ++i) {
    PairBuilder b(sigs, ids, "B" + std::to_string(i));
    const std::string& v = x.v(i);
    int L = static_cast<int>(v.size());

    Pattern& lhs = b.decl.lhs;
    int lb = lhs.add_agent(ids.b_sig);
    int lcur = lhs.add_agent(ids.i_sig);
    int lprev = lhs.add_agent(ids.i_sig);
    int lsprev = lhs.add_agent(ids.s_sig);
    std::vector<int> block;
    for (int k = 0; k < L; ++k) {
      int a = lhs.add_agent(ids.s_sig);
      PairBuilder::set_state(lhs, a, ids.chain_x,
                             state_id(ids.s_sig, std::string(1, v[k])));
      block.push_back(a);
    }
    lhs.require_bond(lb, ids.head_i, lcur, ids.chain_x);
    PairBuilder::set_state(lhs, lcur, ids.chain_x, real_indices[i - 1]);
    lhs.require_bond(lcur, ids.chain_l, lprev, ids.chain_r);
    PairBuilder::set_free(lhs, lprev, ids.chain_x);
    lhs.require_bond(lb, ids.head_s, block[L - 1], ids.chain_x);
    PairBuilder::set_free(lhs, block[L - 1], ids.chain_r);
    lhs.require_bond(lsprev, ids.chain_r, block[0], ids.chain_l);
    for (int k = 0; k + 1 < L; ++k)
      lhs.require_bond(block[k], ids.chain_r, block[k + 1], ids.chain_l);
    for (int k = 0; k + 1 < L; ++k)
      PairBuilder::set_free(lhs, block[k], ids.chain_x);
    PairBuilder::set_free(lhs, lsprev, ids.chain_x);

    Pattern& rhs = b.decl.rhs;
    int rb = rhs.add_agent(ids.b_sig);
    int rcur = rhs.add_agent(ids.i_sig);
    int rprev = rhs.add_agent(ids.i_sig);
    int rsprev = rhs.add_agent(ids.s_sig);
    rhs.require_bond(rb, ids.head_i, rprev, ids.chain_x);
    rhs.require_bond(rb, ids.head_s, rsprev, ids.chain_x);
    PairBuilder::set_state(rhs, rcur, ids.chain_x, real_indices[i - 1]);
    rhs.require_bond(rcur, ids.chain_l, rprev, ids.chain_r);
    PairBuilder::set_free(rhs, rcur, ids.chain_x);
    PairBuilder::set_free(rhs, rsprev, ids.chain_r);

    b.decl.alignment = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    for (int k = 0; k < L; ++k) b.decl.alignment.push_back({block[k], -1});
    b.decl.fwd_rate = q;
    b.decl.bwd_rate = q;
    b.decl.delta_e = 0.0;
    m.pairs.push_back(std::move(b.decl));
  }

  if (extended) {
    // Erase: after a success (head on both dummies) remove the index
    // agent next to the dummy, as long as two or more sit above it.
    {
      PairBuilder b(sigs, ids, "erase");
      Pattern& lhs = b.decl.lhs;
      int lb = lhs.add_agent(ids.b_sig);
      int lsd = lhs.add_agent(ids.s_sig);
      int li0 = lhs.add_agent(ids.i_sig);
      int li1 = lhs.add_agent(ids.i_sig);
      int li2 = lhs.add_agent(ids.i_sig);
      lhs.require_bond(lb, ids.head_s, lsd, ids.chain_x);
      PairBuilder::set_state(lhs, lsd, ids.chain_x, ids.s_star);
      PairBuilder::set_free(lhs, lsd, ids.chain_r);
      lhs.require_bond(lb, ids.head_i, li0, ids.chain_x);
      PairBuilder::set_state(lhs, li0, ids.chain_x, ids.i_star);
      lhs.require_bond(li0, ids.chain_r, li1, ids.chain_l);
      PairBuilder::set_states(lhs, li1, ids.chain_x, real_indices);
      PairBuilder::set_free(lhs, li1, ids.chain_x);
      lhs.require_bond(li1, ids.chain_r, li2, ids.chain_l);

      Pattern& rhs = b.decl.rhs;
      int rb = rhs.add_agent(ids.b_sig);
      int rsd = rhs.add_agent(ids.s_sig);
      int ri0 = rhs.add_agent(ids.i_sig);
      int ri2 = rhs.add_agent(ids.i_sig);
      rhs.require_bond(rb, ids.head_s, rsd, ids.chain_x);
      PairBuilder::set_state(rhs, rsd, ids.chain_x, ids.s_star);
      PairBuilder::set_free(rhs, rsd, ids.chain_r);
      rhs.require_bond(rb, ids.head_i, ri0, ids.chain_x);
      PairBuilder::set_state(rhs, ri0, ids.chain_x, ids.i_star);
      rhs.require_bond(ri0, ids.chain_r, ri2, ids.chain_l);

      b.decl.alignment = {{0, 0}, {1, 1}, {2, 2}, {li1, -1}, {li2, ri2}};
      b.decl.fwd_rate = q;
      b.decl.bwd_rate = q * std::exp(-p.epsilon);
      b.decl.delta_e = -p.epsilon;
      m.pairs.push_back(std::move(b.decl));
    }
    // Second switch: with exactly one recorded index left, drop it and
    // flip back to the forward head, restoring the initial state.
    {
      PairBuilder b(sigs, ids, "switch2");
      Pattern& lhs = b.decl.lhs;
      int lb = lhs.add_agent(ids.b_sig);
      int lsd = lhs.add_agent(ids.s_sig);
      int li0 = lhs.add_agent(ids.i_sig);
      int li1 = lhs.add_agent(ids.i_sig);
      lhs.require_bond(lb, ids.head_s, lsd, ids.chain_x);
      PairBuilder::set_state(lhs, lsd, ids.chain_x, ids.s_star);
      PairBuilder::set_free(lhs, lsd, ids.chain_r);
      lhs.require_bond(lb, ids.head_i, li0, ids.chain_x);
      PairBuilder::set_state(lhs, li0, ids.chain_x, ids.i_star);
      lhs.require_bond(li0, ids.chain_r, li1, ids.chain_l);
      PairBuilder::set_states(lhs, li1, ids.chain_x, real_indices);
      PairBuilder::set_free(lhs, li1, ids.chain_x);
      PairBuilder::set_free(lhs, li1, ids.chain_r);

      Pattern& rhs = b.decl.rhs;
      int rf = rhs.add_agent(ids.f_sig);
      int rsd = rhs.add_agent(ids.s_sig);
      int ri0 = rhs.add_agent(ids.i_sig);
      rhs.require_bond(rf, ids.head_s, rsd, ids.chain_x);
      PairBuilder::set_state(rhs, rsd, ids.chain_x, ids.s_star);
      PairBuilder::set_free(rhs, rsd, ids.chain_r);
      rhs.require_bond(rf, ids.head_i, ri0, ids.chain_x);
      PairBuilder::set_state(rhs, ri0, ids.chain_x, ids.i_star);
      PairBuilder::set_free(rhs, ri0, ids.chain_r);

      b.decl.alignment = {{0, 0}, {1, 1}, {2, 2}, {3, -1}};
      b.decl.fwd_rate = q;
      b.decl.bwd_rate = q * std::exp(p.e_switch);
      b.decl.delta_e = p.e_switch;
      m.pairs.push_back(std::move(b.decl));
    }
  }

  m.rebuild_rules();
  return enc;
}

int count_real_indices(const SiteGraph& g, const EncodingIds& ids) {
  int n = 0;
  for (const Agent& a : g.agents)
    if (a.sig == ids.i_sig && a.state[ids.chain_x] != ids.i_star) ++n;
  return n;
}

namespace {

// The agent the backward head is bound to through `site`, or nullptr.
const Agent* head_neighbour(const SiteGraph& g, const EncodingIds& ids,
                            int head_site) {
  for (const Agent& a : g.agents) {
    if (a.sig != ids.b_sig) continue;
    const BondRef& b = a.bond[head_site];
    return b.attached() ? &g.agents[b.agent] : nullptr;
  }
  return nullptr;
}

}  // namespace

bool graph_is_success(const SiteGraph& g, const EncodingIds& ids) {
  const Agent* s = head_neighbour(g, ids, ids.head_s);
  const Agent* i = head_neighbour(g, ids, ids.head_i);
  return s && i && s->sig == ids.s_sig && s->state[ids.chain_x] == ids.s_star &&
         i->sig == ids.i_sig && i->state[ids.chain_x] == ids.i_star;
}

bool graph_empty_chain_above_dummy(const SiteGraph& g, const EncodingIds& ids) {
  const Agent* s = head_neighbour(g, ids, ids.head_s);
  const Agent* i = head_neighbour(g, ids, ids.head_i);
  return s && i && s->sig == ids.s_sig && s->state[ids.chain_x] == ids.s_star &&
         i->sig == ids.i_sig && i->state[ids.chain_x] != ids.i_star;
}

AbstractState abstract_initial() { return AbstractState{}; }

std::string abstract_key(const AbstractState& s) {
  std::ostringstream os;
  os << (s.mode == AbstractState::Mode::kForward ? "F" : "B");
  if (s.mode == AbstractState::Mode::kBackward) os << s.pos;
  os << '|';
  for (std::size_t k = 0; k < s.log.size(); ++k)
    os << (k ? "." : "") << s.log[k];
  os << '|' << s.chain;
  return os.str();
}

bool is_success(const AbstractState& s) {
  return s.mode == AbstractState::Mode::kBackward && s.pos == 0 &&
         s.chain.empty();
}

void check_abstract_state(const AbstractState& s, const PcpInstance& x) {
  for (int i : s.log)
    if (i < 1 || i > x.size())
      throw ValidationError("abstract state references index " +
                            std::to_string(i));
  if (s.mode == AbstractState::Mode::kForward) {
    if (s.pos != 0) throw ValidationError("forward state with nonzero pos");
  } else {
    if (s.pos < 0 || s.pos > static_cast<int>(s.log.size()))
      throw ValidationError("backward position out of range");
    if (s.log.empty()) throw ValidationError("backward state with empty log");
  }
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<OracleTransition> oracle_transitions(const AbstractState& s,
                                                 const PcpInstance& x,
                                                 const EncodingParams& p,
                                                 bool extended) {
  check_abstract_state(s, x);
  using Mode = AbstractState::Mode;
  int n = x.size();
  int m = static_cast<int>(s.log.size());
  double q = p.base_rate;
  bool at_anchor =
      s.mode == Mode::kBackward && s.pos == 0 && s.chain.empty();

  std::vector<OracleTransition> out;
  auto emit = [&](std::string label, bool forward, double rate, double de,
                  AbstractState succ) {
    out.push_back({std::move(label), forward, rate, de, std::move(succ)});
  };

  // Forward orientation, in compiled rule order.
  if (s.mode == Mode::kForward)
    for (int i = 1; i <= n; ++i) {
      AbstractState t = s;
      t.log.push_back(i);
      t.chain += x.u(i);
      emit("F" + std::to_string(i), true, q, p.epsilon, std::move(t));
    }
  if (s.mode == Mode::kForward && m >= 1) {
    AbstractState t = s;
    t.mode = Mode::kBackward;
    t.pos = m;
    emit("switch1", true, q, 0.0, std::move(t));
  }
  if (s.mode == Mode::kBackward && s.pos >= 1)
    for (int i = 1; i <= n; ++i) {
      if (s.log[s.pos - 1] != i) continue;
      if (!ends_with(s.chain, x.v(i))) continue;
      AbstractState t = s;
      t.pos -= 1;
      t.chain.resize(t.chain.size() - x.v(i).size());
      emit("B" + std::to_string(i), true, q, 0.0, std::move(t));
    }
  if (extended && at_anchor && m >= 2)
    for (int j = 1; j <= n; ++j) {
      if (s.log[0] != j) continue;
      AbstractState t = s;
      t.log.erase(t.log.begin());
      emit("erase#" + std::to_string(j), true, q, -p.epsilon, std::move(t));
    }
  if (extended && at_anchor && m == 1)
    for (int j = 1; j <= n; ++j) {
      if (s.log[0] != j) continue;
      emit("switch2#" + std::to_string(j), true, q, p.e_switch,
           abstract_initial());
    }

  // Backward orientation, same order.
  if (s.mode == Mode::kForward && m >= 1)
    for (int i = 1; i <= n; ++i) {
      if (s.log.back() != i) continue;
      if (!ends_with(s.chain, x.u(i))) continue;
      AbstractState t = s;
      t.log.pop_back();
      t.chain.resize(t.chain.size() - x.u(i).size());
      emit("F" + std::to_string(i) + "_rev", false, q * std::exp(p.epsilon),
           -p.epsilon, std::move(t));
    }
  if (s.mode == Mode::kBackward && s.pos == m) {
    AbstractState t = s;
    t.mode = Mode::kForward;
    t.pos = 0;
    emit("switch1_rev", false, q, 0.0, std::move(t));
  }
  if (s.mode == Mode::kBackward && s.pos < m)
    for (int i = 1; i <= n; ++i) {
      if (s.log[s.pos] != i) continue;
      AbstractState t = s;
      t.pos += 1;
      t.chain += x.v(i);
      emit("B" + std::to_string(i) + "_rev", false, q, 0.0, std::move(t));
    }
  if (extended && at_anchor)
    for (int j = 1; j <= n; ++j) {
      AbstractState t = s;
      t.log.insert(t.log.begin(), j);
      emit("erase#" + std::to_string(j) + "_rev", false,
           q * std::exp(-p.epsilon), p.epsilon, std::move(t));
    }
  if (extended && s.mode == Mode::kForward && m == 0 && s.chain.empty())
    for (int j = 1; j <= n; ++j) {
      AbstractState t;
      t.mode = Mode::kBackward;
      t.log = {j};
      t.pos = 0;
      emit("switch2#" + std::to_string(j) + "_rev", false,
           q * std::exp(p.e_switch), -p.e_switch, std::move(t));
    }
  return out;
}

std::vector<std::vector<int>> solve_pcp_bounded(const PcpInstance& x,
                                                int max_len) {
  x.validate();
  std::vector<std::vector<int>> found;
  std::vector<int> f;
  std::string u, v;
  int n = x.size();

  auto compatible = [](const std::string& a, const std::string& b) {
    const std::string& shorter = a.size() <= b.size() ? a : b;
    const std::string& longer = a.size() <= b.size() ? b : a;
    return longer.compare(0, shorter.size(), shorter) == 0;
  };

  std::function<void()> rec = [&]() {
    if (!f.empty() && u == v) found.push_back(f);
    if (static_cast<int>(f.size()) == max_len) return;
    for (int i = 1; i <= n; ++i) {
      std::size_t lu = u.size(), lv = v.size();
      u += x.u(i);
      v += x.v(i);
      if (compatible(u, v)) {
        f.push_back(i);
        rec();
        f.pop_back();
      }
      u.resize(lu);
      v.resize(lv);
    }
  };
  if (max_len > 0) rec();
  std::sort(found.begin(), found.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a < b;
            });
  return found;
}

}  // namespace ctmceq

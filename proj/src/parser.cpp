#include "ctmceq/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include "ctmceq/errors.hpp"

namespace ctmceq {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line;

  int col() const { return static_cast<int>(pos) + 1; }
  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }
  char get() { return done() ? '\0' : s[pos++]; }
  void skip_ws() {
    while (!done() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line, col(), msg);
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }
  bool accept(char c) {
    skip_ws();
    if (peek() != c) return false;
    ++pos;
    return true;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (!done() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                       s[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected an identifier");
    return s.substr(start, pos - start);
  }
  std::string name() {  // letters and digits only; leaves '_' shorthand free
    skip_ws();
    std::size_t start = pos;
    while (!done() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected a name");
    return s.substr(start, pos - start);
  }
  std::string state_symbol() {
    skip_ws();
    if (peek() == '*') {
      ++pos;
      return "*";
    }
    return name();
  }
  double number() {
    skip_ws();
    std::size_t start = pos;
    while (!done() && (std::isdigit(static_cast<unsigned char>(s[pos])) ||
                       s[pos] == '.' || s[pos] == '-' || s[pos] == '+' ||
                       s[pos] == 'e' || s[pos] == 'E'))
      ++pos;
    if (pos == start) fail("expected a number");
    try {
      return std::stod(s.substr(start, pos - start));
    } catch (const std::exception&) {
      fail("malformed number");
    }
  }
};

struct SiteSpec {
  int site = -1;
  bool has_state = false;
  std::vector<std::string> states;
  enum { kNone, kLabel, kAnyBond } bond = kNone;
  int label = -1;
};

struct AgentSpec {
  bool hole = false;
  int sig = -1;
  std::vector<SiteSpec> sites;
};

// One agent expression: Name(site tokens...) or '.'.
AgentSpec parse_agent(Cursor& c, const SignatureTable& sigs) {
  AgentSpec out;
  c.skip_ws();
  if (c.peek() == '.') {
    c.get();
    out.hole = true;
    return out;
  }
  std::string aname = c.name();
  out.sig = sigs.agent_index(aname);
  if (out.sig < 0) c.fail("unknown agent type '" + aname + "'");
  const AgentSignature& sig = sigs.agents[out.sig];
  c.expect('(');
  if (!c.accept(')')) {
    while (true) {
      SiteSpec ss;
      std::string sname = c.name();
      ss.site = sig.site_index(sname);
      if (ss.site < 0)
        c.fail("unknown site '" + sname + "' on agent '" + aname + "'");
      for (const SiteSpec& prev : out.sites)
        if (prev.site == ss.site)
          c.fail("site '" + sname + "' repeated in one agent");
      // Suffixes in any order: one state spec, one bond spec.
      while (true) {
        c.skip_ws();
        char ch = c.peek();
        if (ch == '{') {
          if (ss.has_state) c.fail("duplicate state spec");
          c.get();
          ss.has_state = true;
          while (true) {
            ss.states.push_back(c.state_symbol());
            c.skip_ws();
            if (c.accept(',')) continue;
            if (c.accept('}')) break;
          }
        } else if (ch == '_') {
          if (ss.has_state) c.fail("duplicate state spec");
          c.get();
          ss.has_state = true;
          ss.states.push_back(c.state_symbol());
        } else if (ch == '^') {
          if (ss.bond != SiteSpec::kNone) c.fail("duplicate bond spec");
          c.get();
          c.skip_ws();
          if (c.peek() == '_') {
            c.get();
            ss.bond = SiteSpec::kAnyBond;
          } else {
            ss.bond = SiteSpec::kLabel;
            ss.label = static_cast<int>(c.number());
          }
        } else {
          break;
        }
      }
      out.sites.push_back(std::move(ss));
      if (c.accept(',')) continue;
      c.expect(')');
      break;
    }
  }
  return out;
}

// Agent list -> Pattern (+ per-position slot or -1 for holes).
Pattern parse_side(Cursor& c, SigPtr sigs, std::vector<int>& positions,
                   const char* stop_tokens) {
  Pattern p;
  p.sigs = sigs;
  positions.clear();
  std::map<int, std::vector<std::pair<int, int>>> label_uses;
  while (true) {
    c.skip_ws();
    if (c.done() || std::strchr(stop_tokens, c.peek())) break;
    AgentSpec spec = parse_agent(c, *sigs);
    if (spec.hole) {
      positions.push_back(-1);
    } else {
      int slot = p.add_agent(spec.sig);
      positions.push_back(slot);
      const AgentSignature& sig = sigs->at(spec.sig);
      for (const SiteSpec& ss : spec.sites) {
        PatternSite& ps = p.agents[slot].sites[ss.site];
        ps.link = LinkCk::kFree;  // mentioned without a bond = free
        if (ss.bond == SiteSpec::kAnyBond) ps.link = LinkCk::kBoundAny;
        if (ss.bond == SiteSpec::kLabel) {
          label_uses[ss.label].push_back({slot, ss.site});
          ps.link = LinkCk::kBoundTo;  // peer filled below
        }
        if (ss.has_state) {
          ps.any_state = false;
          for (const std::string& sym : ss.states) {
            int id = sig.state_index(ss.site, sym);
            if (id < 0)
              c.fail("state '" + sym + "' not in the domain of " + sig.name +
                     "." + sig.sites[ss.site]);
            ps.allowed.push_back(id);
          }
          std::sort(ps.allowed.begin(), ps.allowed.end());
          ps.allowed.erase(std::unique(ps.allowed.begin(), ps.allowed.end()),
                           ps.allowed.end());
        }
      }
    }
    if (!c.accept(',')) break;
  }
  for (const auto& [label, uses] : label_uses) {
    if (uses.size() == 1)
      c.fail("dangling bond label ^" + std::to_string(label));
    if (uses.size() > 2)
      c.fail("bond label ^" + std::to_string(label) + " used more than twice");
    p.require_bond(uses[0].first, uses[0].second, uses[1].first,
                   uses[1].second);
  }
  return p;
}

}  // namespace

SiteGraph pattern_to_concrete(const Pattern& p) {
  SiteGraph g;
  g.sigs = p.sigs;
  for (const PatternAgent& pa : p.agents) g.add_agent(pa.sig);
  for (std::size_t a = 0; a < p.agents.size(); ++a) {
    const AgentSignature& sig = p.sigs->at(p.agents[a].sig);
    for (std::size_t s = 0; s < p.agents[a].sites.size(); ++s) {
      const PatternSite& ps = p.agents[a].sites[s];
      if (ps.link == LinkCk::kBoundAny)
        throw ValidationError("concrete graph cannot use a wildcard bond");
      if (!sig.states[s].empty()) {
        if (ps.any_state || ps.allowed.size() != 1)
          throw ValidationError("site " + sig.name + "." + sig.sites[s] +
                                " needs a concrete internal state");
        g.agents[a].state[s] = ps.allowed[0];
      } else if (!ps.any_state) {
        throw ValidationError("site " + sig.name + "." + sig.sites[s] +
                              " holds no internal state");
      }
      if (ps.link == LinkCk::kBoundTo &&
          !g.agents[a].bond[s].attached())
        g.bind(static_cast<int>(a), static_cast<int>(s), ps.peer_slot,
               ps.peer_site);
    }
  }
  g.validate();
  return g;
}

Model parse_model(const std::string& text) {
  Model m;
  auto sigs = std::make_shared<SignatureTable>();

  std::vector<std::pair<int, std::string>> lines;
  {
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
      ++no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      lines.push_back({no, line});
    }
  }

  // Signatures first; graphs and rules may reference them in any order.
  for (const auto& [no, line] : lines) {
    if (line.rfind("%agent:", 0) != 0) continue;
    Cursor c{line, 7, no};
    AgentSignature sig;
    sig.name = c.name();
    if (sigs->agent_index(sig.name) >= 0)
      c.fail("agent type '" + sig.name + "' declared twice");
    c.expect('(');
    if (!c.accept(')')) {
      while (true) {
        std::string sname = c.name();
        if (sig.site_index(sname) >= 0)
          c.fail("site '" + sname + "' repeated in one agent");
        sig.sites.push_back(sname);
        std::vector<std::string> dom;
        if (c.accept('{')) {
          while (true) {
            dom.push_back(c.state_symbol());
            c.skip_ws();
            if (c.accept(',')) continue;
            if (c.accept('}')) break;
          }
        }
        sig.states.push_back(dom);
        if (c.accept(',')) continue;
        c.expect(')');
        break;
      }
    }
    sigs->agents.push_back(std::move(sig));
  }
  m.sigs = sigs;

  for (const auto& [no, line] : lines) {
    if (line.rfind("%agent:", 0) == 0) continue;
    if (line.rfind("%init:", 0) == 0) {
      Cursor c{line, 6, no};
      std::string gname = c.ident();
      if (m.inits.count(gname))
        c.fail("graph '" + gname + "' declared twice");
      std::vector<int> positions;
      Pattern p = parse_side(c, sigs, positions, "");
      for (int pos : positions)
        if (pos < 0) c.fail("'.' is only meaningful inside rules");
      try {
        m.inits[gname] = pattern_to_concrete(p);
      } catch (const ValidationError& e) {
        c.fail(e.what());
      }
    } else if (line.rfind("%rule:", 0) == 0) {
      Cursor c{line, 6, no};
      RulePairDecl decl;
      decl.name = c.ident();
      for (const RulePairDecl& prev : m.pairs)
        if (prev.name == decl.name)
          c.fail("rule '" + decl.name + "' declared twice");
      std::vector<int> lhs_pos, rhs_pos;
      decl.lhs = parse_side(c, sigs, lhs_pos, "-");
      c.expect('-');
      c.expect('>');
      decl.rhs = parse_side(c, sigs, rhs_pos, "@");
      c.expect('@');
      decl.fwd_rate = c.number();
      if (c.accept(',')) decl.bwd_rate = c.number();
      c.skip_ws();
      if (!c.done()) {
        if (c.ident() != "dE") c.fail("expected dE=<value>");
        c.expect('=');
        decl.delta_e = c.number();
      } else if (decl.bwd_rate > 0.0) {
        decl.delta_e = std::log(decl.bwd_rate / decl.fwd_rate);
      }
      std::size_t npos = std::max(lhs_pos.size(), rhs_pos.size());
      for (std::size_t i = 0; i < npos; ++i)
        decl.alignment.push_back({i < lhs_pos.size() ? lhs_pos[i] : -1,
                                  i < rhs_pos.size() ? rhs_pos[i] : -1});
      try {
        auto expanded = expand_rule_pair(decl);
        (void)expanded;
      } catch (const ValidationError& e) {
        c.fail(e.what());
      }
      m.pairs.push_back(std::move(decl));
    } else {
      throw ParseError(no, 1, "unknown statement (expected %agent:, %init: or %rule:)");
    }
  }
  m.rebuild_rules();
  return m;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared printing for patterns and concrete graphs. Bond labels are
// assigned in first-use order per expression.
struct SidePrinter {
  using EndpointPair = std::pair<std::pair<int, int>, std::pair<int, int>>;
  std::map<EndpointPair, int> labels;
  int next_label = 1;

  int label_for(int a, int s, int b, int t) {
    std::pair<int, int> ea{a, s}, eb{b, t};
    if (eb < ea) std::swap(ea, eb);
    auto [it, fresh] = labels.try_emplace({ea, eb}, next_label);
    if (fresh) ++next_label;
    return it->second;
  }

  std::string agent(const Pattern& p, int slot) {
    const PatternAgent& pa = p.agents[slot];
    const AgentSignature& sig = p.sigs->at(pa.sig);
    std::ostringstream os;
    os << sig.name << '(';
    bool first = true;
    for (std::size_t s = 0; s < pa.sites.size(); ++s) {
      const PatternSite& ps = pa.sites[s];
      if (ps.link == LinkCk::kAny && ps.any_state) continue;
      if (!first) os << ", ";
      first = false;
      os << sig.sites[s];
      if (!ps.any_state) {
        os << '{';
        for (std::size_t k = 0; k < ps.allowed.size(); ++k)
          os << (k ? ", " : "") << sig.states[s][ps.allowed[k]];
        os << '}';
      }
      if (ps.link == LinkCk::kBoundAny) os << "^_";
      if (ps.link == LinkCk::kBoundTo)
        os << '^'
           << label_for(slot, static_cast<int>(s), ps.peer_slot, ps.peer_site);
    }
    os << ')';
    return os.str();
  }
};

Pattern graph_as_pattern(const SiteGraph& g) {
  Pattern p;
  p.sigs = g.sigs;
  for (const Agent& ag : g.agents) {
    int slot = p.add_agent(ag.sig);
    for (std::size_t s = 0; s < ag.state.size(); ++s) {
      PatternSite& ps = p.agents[slot].sites[s];
      if (ag.state[s] >= 0) {
        ps.any_state = false;
        ps.allowed = {ag.state[s]};
        ps.link = LinkCk::kFree;
      }
    }
  }
  for (std::size_t a = 0; a < g.agents.size(); ++a)
    for (std::size_t s = 0; s < g.agents[a].bond.size(); ++s) {
      const BondRef& b = g.agents[a].bond[s];
      if (b.attached() && (static_cast<int>(a) < b.agent ||
                           (static_cast<int>(a) == b.agent &&
                            static_cast<int>(s) < b.site)))
        p.require_bond(static_cast<int>(a), static_cast<int>(s), b.agent,
                       b.site);
    }
  return p;
}

std::string print_side(const Pattern& p,
                       const std::vector<int>& positions) {
  SidePrinter sp;
  std::ostringstream os;
  bool first = true;
  for (int slot : positions) {
    if (!first) os << ", ";
    first = false;
    os << (slot < 0 ? "." : sp.agent(p, slot));
  }
  return os.str();
}

}  // namespace

std::string print_graph(const SiteGraph& g) {
  Pattern p = graph_as_pattern(g);
  std::vector<int> positions(p.agents.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    positions[i] = static_cast<int>(i);
  return print_side(p, positions);
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  for (const AgentSignature& sig : m.sigs->agents) {
    os << "%agent: " << sig.name << '(';
    for (std::size_t s = 0; s < sig.sites.size(); ++s) {
      os << (s ? ", " : "") << sig.sites[s];
      if (!sig.states[s].empty()) {
        os << '{';
        for (std::size_t k = 0; k < sig.states[s].size(); ++k)
          os << (k ? ", " : "") << sig.states[s][k];
        os << '}';
      }
    }
    os << ")\n";
  }
  for (const auto& [name, g] : m.inits)
    os << "%init: " << name << ' ' << print_graph(g) << '\n';
  for (const RulePairDecl& d : m.pairs) {
    std::vector<int> lhs_pos, rhs_pos;
    for (auto [l, r] : d.alignment) {
      lhs_pos.push_back(l);
      rhs_pos.push_back(r);
    }
    // Trailing holes are dropped per side; parsing pads them back.
    while (!lhs_pos.empty() && lhs_pos.back() < 0) lhs_pos.pop_back();
    while (!rhs_pos.empty() && rhs_pos.back() < 0) rhs_pos.pop_back();
    os << "%rule: " << d.name << ' ' << print_side(d.lhs, lhs_pos) << " -> "
       << print_side(d.rhs, rhs_pos) << " @ " << fmt_double(d.fwd_rate);
    if (d.reversible()) os << ", " << fmt_double(d.bwd_rate);
    os << " dE=" << fmt_double(d.delta_e) << '\n';
  }
  return os.str();
}

}  // namespace ctmceq

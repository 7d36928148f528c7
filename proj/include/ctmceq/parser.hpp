#ifndef CTMCEQ_PARSER_HPP
#define CTMCEQ_PARSER_HPP

#include <string>

#include "ctmceq/rules.hpp"

namespace ctmceq {

/// Line-oriented model language:
///   # comment
///   %agent: Name(site1, site2{v1, v2}, ...)
///   %init: name A(s^1, x{v}), B(t^1)
///   %rule: name lhs -> rhs @ fwd_rate, bwd_rate dE=0.5
///
/// `^n` marks the two endpoints of a bond (exactly two uses per label
/// per side), `^_` a bound-to-anything pattern site, `{v}` or `_v` an
/// internal state, `{v1, v2}` a state set, `.` a positional hole on
/// one rule side (the aligned agent on the other side is deleted or
/// created). A one-directional rule omits ", bwd_rate".
Model parse_model(const std::string& text);

std::string print_model(const Model& m);

/// Concrete graph in expression syntax (all bonds labelled, internal
/// states written, free sites without state omitted).
std::string print_graph(const SiteGraph& g);

SiteGraph pattern_to_concrete(const Pattern& p);

}  // namespace ctmceq

#endif

#ifndef CTMCEQ_ERRORS_HPP
#define CTMCEQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctmceq {

struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_), col(col_) {}
};

// Model- or rule-level well-formedness failure (bad signature use, an
// action that cannot be derived, a deleted agent with unaccounted sites).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rule action whose precondition does not hold at apply time. This
// signals a malformed rule, not a soft failure.
struct ApplyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Asymmetric support: an edge whose reverse is missing.
struct SupportError : std::runtime_error {
  int from = -1;
  int to = -1;
  SupportError(int from_, int to_, const std::string& msg)
      : std::runtime_error(msg), from(from_), to(to_) {}
};

}  // namespace ctmceq

#endif

// Text format for protocol inputs: principals, intruder, key table, fresh
// values, level assignment, initial knowledge, the numbered protocol steps
// and an optional explicit roles override. See README for the grammar.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secan/context.hpp"
#include "secan/protocol.hpp"

namespace secan {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, unsigned line, unsigned col)
      : Error("line " + std::to_string(line) + ", col " +
              std::to_string(col) + ": " + msg),
        line_(line), col_(col) {}

  unsigned line() const { return line_; }
  unsigned col() const { return col_; }

 private:
  unsigned line_;
  unsigned col_;
};

struct ParsedInput {
  VerificationContext ctx;
  ProtocolSpec spec;
  std::optional<std::vector<GeneralizedRole>> roles;  // explicit override
  std::map<std::string, Atom> symbols;  // declared name -> atom
};

ParsedInput parse_input(const std::string& text);

// One term in the vocabulary of an already parsed input. Variables are
// written ?NAME or ?NAME:sort; a shared table keeps repeated mentions of a
// name identical across several calls (pass the same map), and `order`
// records first mentions when given.
Message parse_term_in(const ParsedInput& input, const std::string& term,
                      std::map<std::string, Variable>* vars = nullptr,
                      std::vector<Variable>* order = nullptr);

}  // namespace secan

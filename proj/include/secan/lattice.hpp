// Security levels: subsets of the principal set ordered by reverse
// inclusion. Top (the empty set) is maximal secrecy, Bottom (every
// principal) is public. Finite levels may carry symbolic markers standing
// for the unknown contribution of a variable in scope.
#pragma once

#include <set>
#include <string>

#include "secan/term.hpp"

namespace secan {

class JoinWithUnknowns : public Error {
 public:
  using Error::Error;
};

class SecurityLevel {
 public:
  enum class Kind { Top, Bottom, Finite };

  SecurityLevel() : kind_(Kind::Top) {}

  static SecurityLevel top();
  static SecurityLevel bottom();
  // Finite with empty known and unknown parts normalizes to Top.
  static SecurityLevel finite(std::set<std::string> known,
                              std::set<std::string> unknowns = {});

  Kind kind() const { return kind_; }
  bool is_top() const { return kind_ == Kind::Top; }
  bool is_bottom() const { return kind_ == Kind::Bottom; }
  bool is_finite() const { return kind_ == Kind::Finite; }

  const std::set<std::string>& known() const { return known_; }
  const std::set<std::string>& unknowns() const { return unknowns_; }
  bool has_unknowns() const { return !unknowns_.empty(); }

  friend bool operator==(const SecurityLevel&, const SecurityLevel&) = default;

  // "∅/Top", "I/Bottom", "{A,B,S}", "({A,B,S},{Z̄})".
  std::string display() const;

 private:
  Kind kind_;
  std::set<std::string> known_;
  std::set<std::string> unknowns_;
};

// Greatest lower bound: toward less secrecy. Bottom absorbs, Top is
// neutral, finite parts take set union on both components.
SecurityLevel meet(const SecurityLevel& a, const SecurityLevel& b);

// Least upper bound on marker-free levels; throws JoinWithUnknowns when
// either operand carries markers.
SecurityLevel join(const SecurityLevel& a, const SecurityLevel& b);

// Conservative provable ordering l1 ⊒ l2: certain under every
// instantiation of the markers. Finite case requires known(l1) ⊆ known(l2)
// and unknowns(l1) ⊆ unknowns(l2).
bool geq_provable(const SecurityLevel& l1, const SecurityLevel& l2);

}  // namespace secan

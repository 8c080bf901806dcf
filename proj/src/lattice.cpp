#include "secan/lattice.hpp"

#include <algorithm>

namespace secan {

SecurityLevel SecurityLevel::top() { return SecurityLevel(); }

SecurityLevel SecurityLevel::bottom() {
  SecurityLevel l;
  l.kind_ = Kind::Bottom;
  return l;
}

SecurityLevel SecurityLevel::finite(std::set<std::string> known,
                                    std::set<std::string> unknowns) {
  if (known.empty() && unknowns.empty()) return top();
  SecurityLevel l;
  l.kind_ = Kind::Finite;
  l.known_ = std::move(known);
  l.unknowns_ = std::move(unknowns);
  return l;
}

std::string SecurityLevel::display() const {
  switch (kind_) {
    case Kind::Top: return "∅/Top";
    case Kind::Bottom: return "I/Bottom";
    case Kind::Finite: break;
  }
  auto set_str = [](const std::set<std::string>& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& e : s) {
      if (!first) out += ",";
      first = false;
      out += e;
    }
    return out + "}";
  };
  std::string known = set_str(known_);
  if (unknowns_.empty()) return known;
  std::string marks = "{";
  bool first = true;
  for (const auto& u : unknowns_) {
    if (!first) marks += ",";
    first = false;
    marks += u + "̄";  // combining macron
  }
  marks += "}";
  return "(" + known + "," + marks + ")";
}

SecurityLevel meet(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.is_bottom() || b.is_bottom()) return SecurityLevel::bottom();
  if (a.is_top()) return b;
  if (b.is_top()) return a;
  std::set<std::string> known = a.known();
  known.insert(b.known().begin(), b.known().end());
  std::set<std::string> unknowns = a.unknowns();
  unknowns.insert(b.unknowns().begin(), b.unknowns().end());
  return SecurityLevel::finite(std::move(known), std::move(unknowns));
}

SecurityLevel join(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.has_unknowns() || b.has_unknowns())
    throw JoinWithUnknowns("join is undefined on levels carrying markers");
  if (a.is_top() || b.is_top()) return SecurityLevel::top();
  if (a.is_bottom()) return b;
  if (b.is_bottom()) return a;
  std::set<std::string> known;
  std::set_intersection(a.known().begin(), a.known().end(), b.known().begin(),
                        b.known().end(), std::inserter(known, known.begin()));
  return SecurityLevel::finite(std::move(known));
}

bool geq_provable(const SecurityLevel& l1, const SecurityLevel& l2) {
  if (l1.is_top()) return true;
  if (l2.is_bottom()) return true;
  if (l1.is_bottom() || l2.is_top()) return false;
  return std::includes(l2.known().begin(), l2.known().end(),
                       l1.known().begin(), l1.known().end()) &&
         std::includes(l2.unknowns().begin(), l2.unknowns().end(),
                       l1.unknowns().begin(), l1.unknowns().end());
}

}  // namespace secan

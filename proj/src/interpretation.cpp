#include "secan/interpretation.hpp"

namespace secan {

namespace {

void check_subject(const Message& subject) {
  if (!subject.is_atom() && !subject.is_variable())
    throw Error("metric subject must be an atom or a variable");
}

SecurityLevel inverse_level(const VerificationContext& ctx, const Message& key) {
  if (!key.is_atom())
    throw UnassignedLevel("encryption key is not ground: " + key.display());
  return level_of(ctx, inverse_key(ctx, key.as_atom()));
}

// Identities (excluding the subject) and variable markers in the scope of
// one encryption.
void scope_neighbors(const Message& m, const Message& subject,
                     std::set<std::string>& ids,
                     std::set<std::string>& marks) {
  if (m == subject) return;
  switch (m.kind()) {
    case Message::Kind::Atom:
      if (m.as_atom().sort == Sort::Identity) ids.insert(m.as_atom().name);
      break;
    case Message::Kind::Variable:
      marks.insert(m.as_variable().display());
      break;
    case Message::Kind::Concat:
      for (const auto& p : m.parts()) scope_neighbors(p, subject, ids, marks);
      break;
    case Message::Kind::Enc:
      scope_neighbors(m.enc_body(), subject, ids, marks);
      break;
    default:
      break;
  }
}

}  // namespace

SecurityLevel dek(const Message& subject, const Message& m,
                  const VerificationContext& ctx) {
  check_subject(subject);
  SecurityLevel level = SecurityLevel::top();
  for (const auto& occ : occurrences_of(m, subject)) {
    if (occ.enclosing.empty()) {
      level = meet(level, SecurityLevel::bottom());
      continue;
    }
    level = meet(level, inverse_level(ctx, occ.enclosing.back().enc_key()));
  }
  return level;
}

SecurityLevel dekan(const Message& subject, const Message& m,
                    const VerificationContext& ctx) {
  check_subject(subject);
  SecurityLevel level = SecurityLevel::top();
  for (const auto& occ : occurrences_of(m, subject)) {
    if (occ.enclosing.empty()) {
      level = meet(level, SecurityLevel::bottom());
      continue;
    }
    const Message& direct = occ.enclosing.back();
    std::set<std::string> ids;
    std::set<std::string> marks;
    scope_neighbors(direct.enc_body(), subject, ids, marks);
    SecurityLevel contribution =
        meet(inverse_level(ctx, direct.enc_key()),
             SecurityLevel::finite(std::move(ids), std::move(marks)));
    level = meet(level, contribution);
  }
  return level;
}

}  // namespace secan

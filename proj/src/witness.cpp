#include "secan/witness.hpp"

#include <algorithm>

namespace secan {

namespace {

void check_subject(const Message& subject) {
  if (!subject.is_atom() && !subject.is_variable())
    throw Error("metric subject must be an atom or a variable");
}

SecurityLevel subject_level(const Message& subject,
                            const VerificationContext& ctx) {
  if (subject.is_variable()) return SecurityLevel::bottom();
  return level_of(ctx, subject.as_atom());
}

// A non-atom key cannot be shown protective, so its layer is skipped.
std::optional<SecurityLevel> inverse_level(const VerificationContext& ctx,
                                           const Message& key) {
  if (!key.is_atom()) return std::nullopt;
  return level_of(ctx, inverse_key(ctx, key.as_atom()));
}

void subtree_identities(const Message& m, const Message& subject,
                        std::set<std::string>& ids) {
  if (m == subject) return;
  switch (m.kind()) {
    case Message::Kind::Atom:
      if (m.as_atom().sort == Sort::Identity) ids.insert(m.as_atom().name);
      break;
    case Message::Kind::Concat:
      for (const auto& p : m.parts()) subtree_identities(p, subject, ids);
      break;
    case Message::Kind::Enc:
      subtree_identities(m.enc_body(), subject, ids);
      break;
    default:
      break;
  }
}

}  // namespace

SecurityLevel f_max_ik(const Message& subject, const Message& m,
                       const VerificationContext& ctx) {
  check_subject(subject);
  auto occurrences = occurrences_of(m, subject);
  if (occurrences.empty()) return SecurityLevel::top();
  SecurityLevel target = subject_level(subject, ctx);
  SecurityLevel level = SecurityLevel::top();
  for (const auto& occ : occurrences) {
    SecurityLevel contribution = SecurityLevel::bottom();
    for (auto it = occ.enclosing.rbegin(); it != occ.enclosing.rend(); ++it) {
      auto inv = inverse_level(ctx, it->enc_key());
      if (!inv || !geq_provable(*inv, target)) continue;
      std::set<std::string> ids;
      subtree_identities(it->enc_body(), subject, ids);
      contribution = meet(*inv, SecurityLevel::finite(std::move(ids)));
      break;
    }
    level = meet(level, contribution);
  }
  return level;
}

SecurityLevel f_prime(const Message& subject, const Message& m,
                      const VerificationContext& ctx) {
  check_subject(subject);
  if (subject.is_variable()) {
    const Variable& x = subject.as_variable();
    if (!vars_of(m).count(x)) return SecurityLevel::top();
    return f_max_ik(subject, derive_keep(m, x), ctx);
  }
  const Atom& a = subject.as_atom();
  Message erased = derive(m);
  if (atoms_of(erased).count(a)) return f_max_ik(subject, erased, ctx);
  // The atom may instantiate a variable of m under some run; measure every
  // sort-compatible candidate and meet.
  SecurityLevel level = SecurityLevel::top();
  bool candidate = false;
  for (const auto& x : vars_of(m)) {
    if (!sort_accepts(x.sort, subject)) continue;
    candidate = true;
    level = meet(level, f_max_ik(Message::var(x), derive_keep(m, x), ctx));
  }
  return candidate ? level : SecurityLevel::top();
}

LevelWithProvenance lower_bound_upsilon(
    const Message& subject, const Message& m,
    const std::vector<EncryptionPattern>& patterns,
    const VerificationContext& ctx) {
  check_subject(subject);
  LevelWithProvenance out;
  out.level = SecurityLevel::top();
  for (const auto& component : m.components()) {
    bool occurs = !occurrences_of(component, subject).empty();
    if (!occurs) {
      out.contributions.push_back(
          {std::nullopt, "absent from " + component.display(),
           SecurityLevel::top()});
      continue;
    }
    if (component.ground()) {
      SecurityLevel direct = f_max_ik(subject, component, ctx);
      out.level = meet(out.level, direct);
      out.contributions.push_back(
          {std::nullopt, "ground component " + component.display(), direct});
      continue;
    }
    auto sources = sources_of(component, patterns);
    if (sources.empty()) {
      out.no_source = true;
      out.diagnostic = "no pattern source for component " +
                       component.display();
      out.level = meet(out.level, SecurityLevel::bottom());
      out.contributions.push_back(
          {std::nullopt, out.diagnostic, SecurityLevel::bottom()});
      continue;
    }
    for (const auto& src : sources) {
      // Pattern variables bound to the subject each keep their place; the
      // rest of the pattern is concretized by the matcher.
      std::vector<Variable> holes;
      for (const auto& [v, value] : src.unifier.bindings())
        if (value == subject) holes.push_back(v);
      if (holes.empty()) {
        SecurityLevel lvl =
            f_prime(subject, src.unifier.apply(src.pattern->term), ctx);
        out.level = meet(out.level, lvl);
        out.contributions.push_back(
            {src.pattern->index, "matched by " + src.unifier.display(), lvl});
        continue;
      }
      for (const auto& hole : holes) {
        Message neighborhood =
            src.unifier.without(hole).apply(src.pattern->term);
        SecurityLevel lvl = f_prime(Message::var(hole), neighborhood, ctx);
        out.level = meet(out.level, lvl);
        out.contributions.push_back(
            {src.pattern->index,
             "keeping " + hole.display() + " in " + neighborhood.display(),
             lvl});
      }
    }
  }
  return out;
}

}  // namespace secan

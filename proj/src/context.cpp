#include "secan/context.hpp"

#include <algorithm>

namespace secan {

Atom inverse_key(const VerificationContext& ctx, const Atom& k) {
  if (k.sort != Sort::Key)
    throw UnknownKey("not a key: " + k.display());
  if (!ctx.keys.count(k.name))
    throw UnknownKey("key not declared in context: " + k.name);
  Atom inv = k;
  inv.is_inverse = !k.is_inverse;
  return inv;
}

SecurityLevel level_of(const VerificationContext& ctx, const Atom& a) {
  switch (a.sort) {
    case Sort::Identity:
      return SecurityLevel::bottom();
    case Sort::Key: {
      auto it = ctx.keys.find(a.name);
      if (it == ctx.keys.end())
        throw UnassignedLevel("no level assigned to key " + a.display());
      return a.is_inverse ? it->second.inv_level : it->second.key_level;
    }
    default: {
      auto it = ctx.atom_levels.find(a.name);
      if (it == ctx.atom_levels.end())
        throw UnassignedLevel("no level assigned to atom " + a.display());
      return it->second;
    }
  }
}

DeductionClosure::DeductionClosure(const VerificationContext& ctx,
                                   std::vector<Message> initial)
    : ctx_(ctx) {
  for (auto& m : initial)
    if (!m.is_epsilon()) closed_.insert(std::move(m));
  saturate();
}

void DeductionClosure::add(const Message& m) {
  if (m.is_epsilon()) return;
  closed_.insert(m);
  saturate();
}

void DeductionClosure::saturate() {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Message> found;
    for (const auto& m : closed_) {
      if (m.is_concat()) {
        for (const auto& p : m.parts())
          if (!closed_.count(p)) found.push_back(p);
      } else if (m.is_enc() && m.enc_key().is_atom()) {
        const Atom& k = m.enc_key().as_atom();
        if (ctx_.keys.count(k.name)) {
          Atom inv = inverse_key(ctx_, k);
          if (closed_.count(Message::atom(inv)) &&
              !closed_.count(m.enc_body()))
            found.push_back(m.enc_body());
        }
      }
    }
    for (auto& f : found) {
      closed_.insert(std::move(f));
      changed = true;
    }
  }
}

bool DeductionClosure::derives(const Message& target) const {
  switch (target.kind()) {
    case Message::Kind::Epsilon:
      return true;
    case Message::Kind::Concat:
      if (closed_.count(target)) return true;
      return std::all_of(target.parts().begin(), target.parts().end(),
                         [&](const Message& p) { return derives(p); });
    case Message::Kind::Enc:
      if (closed_.count(target)) return true;
      return derives(target.enc_body()) && derives(target.enc_key());
    default:
      return closed_.count(target) > 0;
  }
}

bool agent_can_derive(const VerificationContext& ctx,
                      const std::string& agent, const Message& m,
                      std::span<const Message> extra) {
  std::vector<Message> initial;
  auto it = ctx.knowledge.find(agent);
  if (it != ctx.knowledge.end())
    for (const auto& a : it->second) initial.push_back(Message::atom(a));
  initial.insert(initial.end(), extra.begin(), extra.end());
  DeductionClosure closure(ctx, std::move(initial));
  return closure.derives(m);
}

}  // namespace secan

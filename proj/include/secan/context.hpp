// Verification context: principals, intruder, key table with involutive
// inverses, the partial security-level assignment, and per-agent initial
// knowledge.
#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "secan/lattice.hpp"
#include "secan/term.hpp"

namespace secan {

class UnassignedLevel : public Error {
 public:
  using Error::Error;
};

class UnknownKey : public Error {
 public:
  using Error::Error;
};

struct KeyInfo {
  Atom key;                 // non-inverse half
  SecurityLevel key_level;  // level of the key itself
  SecurityLevel inv_level;  // level of its inverse
};

struct VerificationContext {
  std::set<std::string> principals;
  std::string intruder;
  std::map<std::string, KeyInfo> keys;               // by key name
  std::map<std::string, SecurityLevel> atom_levels;  // non-key, non-identity
  std::map<std::string, std::set<Atom>> knowledge;   // agent -> initial atoms

  bool is_principal(const std::string& name) const {
    return principals.count(name) > 0;
  }
};

// Involutive key inversion: k -> k^-1 -> k. UnknownKey when the atom is not
// a key or is not declared in the context's key table.
Atom inverse_key(const VerificationContext& ctx, const Atom& k);

// Context level of an atom. Identities are Bottom; keys come from the key
// table; other atoms from atom_levels (session indices ignored).
// UnassignedLevel when no assignment exists.
SecurityLevel level_of(const VerificationContext& ctx, const Atom& a);

// Local deduction closure over a message set: unpairing, decryption with
// derivable inverse keys, then recursive composition. Variables are opaque
// constants (derivable only if present).
class DeductionClosure {
 public:
  DeductionClosure(const VerificationContext& ctx,
                   std::vector<Message> initial);

  // Adds a message and re-saturates.
  void add(const Message& m);

  bool derives(const Message& target) const;

  // Analyzed closure: initial messages plus everything reachable by
  // unpairing and decryption, deduplicated.
  const std::set<Message>& analyzed() const { return closed_; }

 private:
  void saturate();

  const VerificationContext& ctx_;
  std::set<Message> closed_;
};

// True when the agent can build m from its initial knowledge (plus the
// extra terms, typically values learned earlier in a role) by pairing,
// encryption with known keys, and decryption with known inverse keys.
bool agent_can_derive(const VerificationContext& ctx,
                      const std::string& agent, const Message& m,
                      std::span<const Message> extra = {});

}  // namespace secan

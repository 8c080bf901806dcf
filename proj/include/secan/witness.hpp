// Reliable metric family: f_max_ik reads the innermost protective
// encryption layer; f_prime is its substitution-independent derivative over
// variable-erased messages; lower_bound_upsilon bounds a sent component's
// level from below across every pattern source it unifies with.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secan/context.hpp"
#include "secan/lattice.hpp"
#include "secan/protocol.hpp"
#include "secan/term.hpp"

namespace secan {

// Innermost-outward scan for the first key whose inverse's level dominates
// the subject's context level; that key's inverse level meets the identity
// neighbors inside the protective ciphertext. No protective layer gives
// Bottom, no occurrence gives Top. A variable subject counts as Bottom
// level, so its innermost layer is always protective.
SecurityLevel f_max_ik(const Message& subject, const Message& m,
                       const VerificationContext& ctx);

// Derivative: atoms still present after variable erasure are measured on
// derive(m); a subject that is (or could instantiate) a variable X of m is
// measured as X on derive_keep(m, X), meeting over the sort-compatible
// candidates; Top when absent entirely.
SecurityLevel f_prime(const Message& subject, const Message& m,
                      const VerificationContext& ctx);

struct SourceContribution {
  std::optional<unsigned> pattern_index;  // absent: ground or absent subject
  std::string detail;                     // unifier or note, for reports
  SecurityLevel level;
};

struct LevelWithProvenance {
  SecurityLevel level;
  std::vector<SourceContribution> contributions;
  bool no_source = false;  // some component had the subject but no source
  std::string diagnostic;
};

// Lower bound on the witness function for a sent message m: per component,
// ground components are measured directly, components without the subject
// give Top, and the rest contribute f_prime over the static neighborhood of
// every pattern source (the matcher applied everywhere except the
// positions bound to the subject). A component with no source is reported
// and contributes Bottom.
LevelWithProvenance lower_bound_upsilon(
    const Message& subject, const Message& m,
    const std::vector<EncryptionPattern>& patterns,
    const VerificationContext& ctx);

}  // namespace secan

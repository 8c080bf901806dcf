// Interpretation functions: per-occurrence security estimates read off the
// direct encryption layer. DEK uses the decryption key's level alone; DEKAN
// additionally folds in the neighbor identities under that layer, with
// symbolic markers for variables in scope.
#pragma once

#include "secan/context.hpp"
#include "secan/lattice.hpp"
#include "secan/term.hpp"

namespace secan {

// Meet over occurrences of the level of the direct encryption key's
// inverse; a plaintext occurrence gives Bottom, no occurrence gives Top.
// subject must be an atom or variable message.
SecurityLevel dek(const Message& subject, const Message& m,
                  const VerificationContext& ctx);

// DEK refined with the neighbors under the direct encryption: identity
// atoms in that scope join the known part, variables in that scope become
// markers.
SecurityLevel dekan(const Message& subject, const Message& m,
                    const VerificationContext& ctx);

}  // namespace secan

// Intruder-side cross checks: a randomized probe of deduction invariance
// for a candidate metric, and a bounded state-space search for a concrete
// secrecy attack over interleaved role sessions.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secan/context.hpp"
#include "secan/lattice.hpp"
#include "secan/protocol.hpp"

namespace secan {

class SearchBudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Candidate metric under probe: (subject, message) -> level.
using MetricFn =
    std::function<SecurityLevel(const Message&, const Message&)>;

struct ProbeOptions {
  unsigned trials = 1000;
  unsigned depth = 2;      // maximum nesting of sampled knowledge terms
  unsigned max_set = 3;    // maximum messages per sampled knowledge set
  std::uint64_t seed = 20260816;
};

struct ProbeViolation {
  std::string clause;  // "invariance" or "anchor"
  std::string subject;
  std::vector<std::string> knowledge;  // sampled set, rendered
  std::string derived;                 // offending derivable message
  SecurityLevel level_on_derived;
  SecurityLevel level_on_knowledge;
};

struct ProbeReport {
  unsigned trials = 0;
  std::size_t violation_count = 0;
  std::vector<ProbeViolation> violations;  // first few, for reports
};

// Atoms worth sampling: principals, both halves of every declared key,
// initial-knowledge atoms and the protocol's fresh atoms, deduplicated.
std::vector<Atom> default_atom_pool(const VerificationContext& ctx,
                                    const ProtocolSpec& spec);

// Samples knowledge sets M over the pool and messages m derivable from
// M together with the intruder's initial knowledge, then checks, for every
// atom in scope, that the metric never increases under deduction
// (level(a, m) >= level(a, M)) and that a derivable atom's level on M is
// Bottom; both checks are waived for subjects the intruder may know, that
// is when some intruder key's level dominates the subject's. Payload
// positions draw only public non-inverse atoms; inverse keys appear at key
// positions, which keeps every sampled set inside the threat model.
ProbeReport probe_full_invariance(const MetricFn& metric,
                                  const VerificationContext& ctx,
                                  const std::vector<Atom>& pool,
                                  const ProbeOptions& opts = {});

struct AttackStep {
  std::string agent;
  unsigned session = 0;  // 1-based instance number of the agent's role
  std::size_t rule = 0;  // 1-based
  Message received;      // instance fed by the intruder (epsilon if none)
  Message sent;          // instance observed by the intruder
};

struct AttackTrace {
  std::vector<AttackStep> steps;
  Atom leaked;
};

// Depth-first exploration of every interleaving of up to `sessions`
// instances of each role, the intruder acting as the network: a rule fires
// when the intruder can derive an instance of its receive shape, and every
// reply joins the intruder's knowledge. Returns the first interleaving
// leaking the secret, nothing when the bounded space is exhausted, and
// throws SearchBudgetExceeded past node_cap expansions.
std::optional<AttackTrace> bounded_attack_search(
    const std::vector<GeneralizedRole>& roles, const VerificationContext& ctx,
    const Atom& secret, unsigned sessions, std::size_t node_cap = 1000000);

}  // namespace secan

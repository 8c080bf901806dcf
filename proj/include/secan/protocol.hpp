// Protocol steps, generalized roles (receives attributed to the intruder,
// unknown maximal subterms abstracted into variables, session-indexed fresh
// nonces), and the encryption-pattern set analyses unify against.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secan/context.hpp"
#include "secan/term.hpp"

namespace secan {

class MalformedSpec : public Error {
 public:
  using Error::Error;
};

struct ProtocolStep {
  unsigned id = 0;
  std::string sender;
  std::string receiver;
  Message message;  // ground
};

struct ProtocolSpec {
  std::vector<ProtocolStep> steps;
  std::map<std::string, std::set<Atom>> fresh;  // agent -> fresh atoms
};

struct RoleRule {
  Message received;  // epsilon when the step only sends
  Message sent;      // epsilon when the step only receives
  // Nominal peers from the concrete protocol, kept for display.
  std::optional<std::string> recv_from;
  std::optional<std::string> send_to;
};

struct GeneralizedRole {
  std::string agent;
  std::vector<RoleRule> rules;
  std::vector<Variable> variables;  // in order of introduction
};

struct EncryptionPattern {
  unsigned index = 0;  // 1-based, in role/rule/component order
  Message term;
  // Origin, for reports.
  std::string role;
  size_t rule = 0;  // 1-based
  bool from_receive = false;
};

// One role per participating agent (sorted by name). Validates that every
// sent message is derivable by its sender from initial knowledge, fresh
// values and learned subterms; throws MalformedSpec otherwise.
std::vector<GeneralizedRole> extract_generalized_roles(
    const ProtocolSpec& spec, const VerificationContext& ctx);

// Index-renamed top-level encryption components of every received and sent
// role message, receives before sends within a rule.
std::vector<EncryptionPattern> encryption_patterns(
    const std::vector<GeneralizedRole>& roles);

struct PatternSource {
  const EncryptionPattern* pattern;
  Substitution unifier;
};

// Patterns matching m (pattern variables only are bound), with their
// most general matchers, in pattern order.
std::vector<PatternSource> sources_of(
    const Message& m, const std::vector<EncryptionPattern>& patterns);

// Explicit-role validation used by the override path: every variable must
// be received before it is sent, sorts must be well-formed.
void validate_roles(const std::vector<GeneralizedRole>& roles,
                    const VerificationContext& ctx);

}  // namespace secan

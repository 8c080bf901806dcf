// The increasing check: for every generalized role rule and every atom or
// variable of the sent message, the level of the subject in what is sent
// must provably dominate its assigned level met with its level in
// everything received so far.
#pragma once

#include <string>
#include <vector>

#include "secan/context.hpp"
#include "secan/lattice.hpp"
#include "secan/protocol.hpp"
#include "secan/witness.hpp"

namespace secan {

enum class Metric { Dek, Dekan, Witness };

std::string to_string(Metric m);

struct Verdict {
  std::string role;
  size_t rule = 0;  // 1-based
  std::string rule_received;  // display forms, for reports
  std::string rule_sent;
  std::string subject;
  bool subject_is_variable = false;
  SecurityLevel sent_level;
  SecurityLevel received_level;
  SecurityLevel context_level;  // Top surrogate for variables
  bool holds = false;
  std::string explanation;  // empty when the rule condition holds
  // Witness metric only: how the sent-side bound was assembled.
  std::vector<SourceContribution> sent_provenance;
};

struct AnalysisReport {
  Metric metric = Metric::Dek;
  std::vector<Verdict> verdicts;
  bool increasing = false;

  std::string render_text() const;
  std::string render_json() const;
};

AnalysisReport analyze(Metric metric, const std::vector<GeneralizedRole>& roles,
                       const VerificationContext& ctx);

}  // namespace secan

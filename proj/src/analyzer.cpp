#include "secan/analyzer.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "secan/interpretation.hpp"

namespace secan {

namespace {

using nlohmann::json;

json level_to_json(const SecurityLevel& l) {
  if (l.is_top()) return "Top";
  if (l.is_bottom()) return "Bottom";
  json arr = json::array();
  for (const auto& k : l.known()) arr.push_back(k);
  for (const auto& u : l.unknowns()) arr.push_back(u + "̄");
  return arr;
}

struct RuleKey {
  std::string role;
  size_t rule;
  friend bool operator==(const RuleKey&, const RuleKey&) = default;
};

}  // namespace

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Dek: return "dek";
    case Metric::Dekan: return "dekan";
    case Metric::Witness: return "witness";
  }
  return "?";
}

AnalysisReport analyze(Metric metric, const std::vector<GeneralizedRole>& roles,
                       const VerificationContext& ctx) {
  AnalysisReport report;
  report.metric = metric;
  std::vector<EncryptionPattern> patterns;
  if (metric == Metric::Witness) patterns = encryption_patterns(roles);

  for (const auto& role : roles) {
    std::vector<Message> received_so_far;
    for (size_t j = 0; j < role.rules.size(); ++j) {
      const RoleRule& rule = role.rules[j];
      if (!rule.received.is_epsilon()) received_so_far.push_back(rule.received);
      Message r_minus = Message::concat(received_so_far);
      if (rule.sent.is_epsilon()) continue;

      std::vector<Message> subjects;
      for (const auto& a : atoms_of(rule.sent)) subjects.push_back(Message::atom(a));
      for (const auto& v : vars_of(rule.sent)) subjects.push_back(Message::var(v));

      for (const auto& subject : subjects) {
        Verdict v;
        v.role = role.agent;
        v.rule = j + 1;
        v.subject_is_variable = subject.is_variable();
        v.subject = subject.display();
        v.rule_received = rule.received.display();
        v.rule_sent = rule.sent.display();
        try {
          v.context_level = subject.is_atom()
                                ? level_of(ctx, subject.as_atom())
                                : SecurityLevel::top();
          switch (metric) {
            case Metric::Dek:
              v.sent_level = dek(subject, rule.sent, ctx);
              v.received_level = dek(subject, r_minus, ctx);
              break;
            case Metric::Dekan:
              v.sent_level = dekan(subject, rule.sent, ctx);
              v.received_level = dekan(subject, r_minus, ctx);
              break;
            case Metric::Witness: {
              LevelWithProvenance bound =
                  lower_bound_upsilon(subject, rule.sent, patterns, ctx);
              v.sent_level = bound.level;
              v.sent_provenance = bound.contributions;
              if (bound.no_source) v.explanation = bound.diagnostic;
              v.received_level = f_prime(subject, r_minus, ctx);
              break;
            }
          }
          SecurityLevel rhs = meet(v.context_level, v.received_level);
          v.holds = geq_provable(v.sent_level, rhs);
          if (!v.holds && v.explanation.empty())
            v.explanation = "sent level " + v.sent_level.display() +
                            " does not provably dominate " + rhs.display();
        } catch (const UnassignedLevel& e) {
          v.holds = false;
          v.explanation = e.what();
        }
        report.verdicts.push_back(std::move(v));
      }
    }
  }
  report.increasing =
      std::all_of(report.verdicts.begin(), report.verdicts.end(),
                  [](const Verdict& v) { return v.holds; });
  return report;
}

std::string AnalysisReport::render_text() const {
  std::ostringstream out;
  out << "increasing analysis, metric " << to_string(metric) << "\n";
  RuleKey last{"", 0};
  for (const auto& v : verdicts) {
    RuleKey key{v.role, v.rule};
    if (!(key == last)) {
      out << "\nrole " << v.role << ", rule " << v.rule << "\n";
      out << "  receives " << v.rule_received << "\n";
      out << "  sends    " << v.rule_sent << "\n";
      last = key;
    }
    out << "  " << (v.holds ? "holds " : "FAILS ") << v.subject << ": sent "
        << v.sent_level.display() << " vs context "
        << v.context_level.display() << " meet received "
        << v.received_level.display();
    if (!v.explanation.empty()) out << "  (" << v.explanation << ")";
    out << "\n";
    for (const auto& c : v.sent_provenance) {
      out << "      via ";
      if (c.pattern_index) out << "pattern " << *c.pattern_index << ", ";
      out << c.detail << " -> " << c.level.display() << "\n";
    }
  }
  out << "\nresult: " << (increasing ? "Increasing" : "NotProvedIncreasing")
      << "\n";
  return out.str();
}

std::string AnalysisReport::render_json() const {
  json doc;
  doc["schema"] = 1;
  doc["metric"] = to_string(metric);
  doc["increasing"] = increasing;
  json list = json::array();
  for (const auto& v : verdicts) {
    json jv;
    jv["role"] = v.role;
    jv["rule"] = v.rule;
    jv["received"] = v.rule_received;
    jv["sent"] = v.rule_sent;
    jv["subject"] = v.subject;
    jv["variable"] = v.subject_is_variable;
    jv["sent_level"] = level_to_json(v.sent_level);
    jv["received_level"] = level_to_json(v.received_level);
    jv["context_level"] = level_to_json(v.context_level);
    jv["holds"] = v.holds;
    if (!v.explanation.empty()) jv["explanation"] = v.explanation;
    if (!v.sent_provenance.empty()) {
      json prov = json::array();
      for (const auto& c : v.sent_provenance) {
        json jc;
        if (c.pattern_index) jc["pattern"] = *c.pattern_index;
        jc["detail"] = c.detail;
        jc["level"] = level_to_json(c.level);
        prov.push_back(std::move(jc));
      }
      jv["provenance"] = std::move(prov);
    }
    list.push_back(std::move(jv));
  }
  doc["verdicts"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace secan

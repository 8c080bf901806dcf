#include "secan/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "secan/analyzer.hpp"
#include "secan/dsl.hpp"
#include "secan/interpretation.hpp"
#include "secan/oracle.hpp"
#include "secan/witness.hpp"

namespace secan {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json level_to_json(const SecurityLevel& l) {
  if (l.is_top()) return "Top";
  if (l.is_bottom()) return "Bottom";
  json arr = json::array();
  for (const auto& k : l.known()) arr.push_back(k);
  for (const auto& u : l.unknowns()) arr.push_back(u + "̄");
  return arr;
}

// Round-trippable term syntax, as accepted by the input parser.
std::string to_dsl(const Message& m) {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
      return "epsilon";
    case Message::Kind::Atom: {
      const Atom& a = m.as_atom();
      if (a.is_inverse) return "inv(" + a.name + ")";
      std::string s = a.name;
      if (a.session_fresh)
        s += "^" + (a.session_run ? std::to_string(*a.session_run)
                                  : std::string("i"));
      return s;
    }
    case Message::Kind::Variable: {
      const Variable& v = m.as_variable();
      return "?" + v.name + ":" + to_string(v.sort);
    }
    case Message::Kind::Concat: {
      std::string s;
      for (const auto& p : m.parts()) {
        if (!s.empty()) s += " . ";
        s += to_dsl(p);
      }
      return s;
    }
    case Message::Kind::Enc:
      return "enc(" + to_dsl(m.enc_body()) + ", " + to_dsl(m.enc_key()) + ")";
  }
  return "epsilon";
}

std::vector<GeneralizedRole> load_roles_json(const ParsedInput& input,
                                             const std::string& path) {
  json doc = json::parse(slurp(path));
  if (!doc.contains("roles") || !doc["roles"].is_array())
    throw Error("roles file needs a 'roles' array");
  std::vector<GeneralizedRole> roles;
  for (const auto& jr : doc["roles"]) {
    GeneralizedRole role;
    role.agent = jr.at("agent").get<std::string>();
    std::map<std::string, Variable> vars;
    for (const auto& jrule : jr.at("rules")) {
      RoleRule rule;
      rule.received = parse_term_in(input, jrule.at("recv").get<std::string>(),
                                    &vars, &role.variables);
      rule.sent = parse_term_in(input, jrule.at("send").get<std::string>(),
                                &vars, &role.variables);
      role.rules.push_back(std::move(rule));
    }
    roles.push_back(std::move(role));
  }
  validate_roles(roles, input.ctx);
  return roles;
}

std::vector<GeneralizedRole> roles_for(const ParsedInput& input,
                                       const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_roles_json(input, explicit_path);
  if (input.roles) return *input.roles;
  return extract_generalized_roles(input.spec, input.ctx);
}

int cmd_analyze(const std::string& input_path, const std::string& metric_name,
                const std::string& format, const std::string& roles_path) {
  ParsedInput input = parse_input(slurp(input_path));
  Metric metric = metric_name == "dek"    ? Metric::Dek
                  : metric_name == "dekan" ? Metric::Dekan
                                           : Metric::Witness;
  AnalysisReport report =
      analyze(metric, roles_for(input, roles_path), input.ctx);
  std::cout << (format == "json" ? report.render_json() : report.render_text());
  return report.increasing ? 0 : 2;
}

int cmd_roles(const std::string& input_path, const std::string& format,
              const std::string& roles_path) {
  ParsedInput input = parse_input(slurp(input_path));
  auto roles = roles_for(input, roles_path);
  if (format == "json") {
    json doc;
    doc["schema"] = 1;
    json list = json::array();
    for (const auto& role : roles) {
      json jr;
      jr["agent"] = role.agent;
      json vars = json::array();
      for (const auto& v : role.variables)
        vars.push_back({{"name", v.name}, {"sort", to_string(v.sort)}});
      jr["variables"] = std::move(vars);
      json rules = json::array();
      for (const auto& rule : role.rules)
        rules.push_back({{"recv", to_dsl(rule.received)},
                         {"send", to_dsl(rule.sent)}});
      jr["rules"] = std::move(rules);
      list.push_back(std::move(jr));
    }
    doc["roles"] = std::move(list);
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  for (const auto& role : roles) {
    std::cout << "role " << role.agent << "\n";
    if (!role.variables.empty()) {
      std::cout << "  variables:";
      for (const auto& v : role.variables)
        std::cout << " " << v.display() << ":" << to_string(v.sort);
      std::cout << "\n";
    }
    for (size_t r = 0; r < role.rules.size(); ++r) {
      std::cout << "  " << r + 1 << ". recv "
                << role.rules[r].received.display() << "\n";
      std::cout << "     send " << role.rules[r].sent.display() << "\n";
    }
  }
  return 0;
}

int cmd_patterns(const std::string& input_path, const std::string& format,
                 const std::string& roles_path) {
  ParsedInput input = parse_input(slurp(input_path));
  auto patterns = encryption_patterns(roles_for(input, roles_path));
  if (format == "json") {
    json doc;
    doc["schema"] = 1;
    json list = json::array();
    for (const auto& p : patterns)
      list.push_back({{"index", p.index},
                      {"term", p.term.display()},
                      {"role", p.role},
                      {"rule", p.rule},
                      {"from_receive", p.from_receive}});
    doc["patterns"] = std::move(list);
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  for (const auto& p : patterns)
    std::cout << p.index << ". " << p.term.display() << "  (role " << p.role
              << ", rule " << p.rule << ", "
              << (p.from_receive ? "receive" : "send") << ")\n";
  return 0;
}

int cmd_probe(const std::string& input_path, const std::string& metric_name,
              const std::string& format, const ProbeOptions& opts) {
  ParsedInput input = parse_input(slurp(input_path));
  const VerificationContext& ctx = input.ctx;
  MetricFn metric;
  if (metric_name == "dek") {
    metric = [&ctx](const Message& s, const Message& m) {
      return dek(s, m, ctx);
    };
  } else if (metric_name == "dekan") {
    metric = [&ctx](const Message& s, const Message& m) {
      return dekan(s, m, ctx);
    };
  } else {
    metric = [&ctx](const Message& s, const Message& m) {
      return f_max_ik(s, m, ctx);
    };
  }
  auto pool = default_atom_pool(ctx, input.spec);
  ProbeReport report = probe_full_invariance(metric, ctx, pool, opts);
  if (format == "json") {
    json doc;
    doc["schema"] = 1;
    doc["metric"] = metric_name;
    doc["trials"] = report.trials;
    doc["violations"] = report.violation_count;
    json list = json::array();
    for (const auto& v : report.violations)
      list.push_back({{"clause", v.clause},
                      {"subject", v.subject},
                      {"knowledge", v.knowledge},
                      {"derived", v.derived},
                      {"level_on_derived", level_to_json(v.level_on_derived)},
                      {"level_on_knowledge",
                       level_to_json(v.level_on_knowledge)}});
    doc["examples"] = std::move(list);
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "probe metric " << metric_name << ": " << report.trials
              << " trials, " << report.violation_count << " violations\n";
    for (const auto& v : report.violations) {
      std::cout << "  [" << v.clause << "] subject " << v.subject
                << ", derived " << v.derived << ": level "
                << v.level_on_derived.display() << " vs "
                << v.level_on_knowledge.display() << " on {";
      for (size_t i = 0; i < v.knowledge.size(); ++i)
        std::cout << (i ? ", " : "") << v.knowledge[i];
      std::cout << "}\n";
    }
  }
  return report.violation_count ? 2 : 0;
}

int cmd_attack(const std::string& input_path, const std::string& secret_name,
               unsigned sessions, std::size_t node_cap,
               const std::string& format, const std::string& roles_path) {
  ParsedInput input = parse_input(slurp(input_path));
  auto it = input.symbols.find(secret_name);
  if (it == input.symbols.end())
    throw Error("unknown secret '" + secret_name + "'");
  auto roles = roles_for(input, roles_path);
  auto trace =
      bounded_attack_search(roles, input.ctx, it->second, sessions, node_cap);
  if (format == "json") {
    json doc;
    doc["schema"] = 1;
    doc["secret"] = secret_name;
    doc["sessions"] = sessions;
    doc["found"] = trace.has_value();
    json steps = json::array();
    if (trace)
      for (const auto& s : trace->steps)
        steps.push_back({{"agent", s.agent},
                         {"session", s.session},
                         {"rule", s.rule},
                         {"recv", s.received.display()},
                         {"sent", s.sent.display()}});
    doc["trace"] = std::move(steps);
    std::cout << doc.dump(2) << "\n";
  } else if (trace) {
    std::cout << "secret " << secret_name << " leaked after "
              << trace->steps.size() << " steps\n";
    for (size_t i = 0; i < trace->steps.size(); ++i) {
      const auto& s = trace->steps[i];
      std::cout << "  " << i + 1 << ". " << s.agent << "#" << s.session
                << " rule " << s.rule << ": recv " << s.received.display()
                << " | sent " << s.sent.display() << "\n";
    }
  } else {
    std::cout << "no attack found within " << sessions
              << " sessions per role\n";
  }
  return trace ? 3 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"static secrecy analysis for cryptographic protocols"};
  app.require_subcommand(1);

  std::string format = "text";
  std::string roles_path;

  auto add_common = [&](CLI::App* cmd, std::string& input_path) {
    cmd->add_option("input", input_path, "protocol description file")
        ->required();
    cmd->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--explicit-roles", roles_path,
                    "JSON roles file overriding role extraction");
  };

  std::string analyze_input, analyze_metric;
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "decide whether the protocol is increasing under a metric");
  analyze_cmd->add_option("--metric", analyze_metric, "dek, dekan or witness")
      ->required()
      ->check(CLI::IsMember({"dek", "dekan", "witness"}));
  add_common(analyze_cmd, analyze_input);

  std::string roles_input;
  auto* roles_cmd =
      app.add_subcommand("roles", "print the generalized roles");
  add_common(roles_cmd, roles_input);

  std::string patterns_input;
  auto* patterns_cmd =
      app.add_subcommand("patterns", "print the encryption patterns");
  add_common(patterns_cmd, patterns_input);

  auto* oracle_cmd =
      app.add_subcommand("oracle", "intruder-side cross checks");
  oracle_cmd->require_subcommand(1);

  std::string probe_input, probe_metric = "fmax";
  ProbeOptions probe_opts;
  auto* probe_cmd = oracle_cmd->add_subcommand(
      "probe", "randomized deduction-invariance check of a metric");
  probe_cmd->add_option("--metric", probe_metric, "fmax, dek or dekan")
      ->check(CLI::IsMember({"fmax", "dek", "dekan"}));
  probe_cmd->add_option("--trials", probe_opts.trials, "sampled sets");
  probe_cmd->add_option("--depth", probe_opts.depth, "term nesting bound");
  probe_cmd->add_option("--max-set", probe_opts.max_set,
                        "messages per sampled set");
  probe_cmd->add_option("--seed", probe_opts.seed, "RNG seed");
  add_common(probe_cmd, probe_input);

  std::string attack_input, attack_secret;
  unsigned attack_sessions = 2;
  std::size_t attack_cap = 1000000;
  auto* attack_cmd = oracle_cmd->add_subcommand(
      "attack", "bounded search for a secrecy attack");
  attack_cmd->add_option("--secret", attack_secret, "atom that must not leak")
      ->required();
  attack_cmd->add_option("--sessions", attack_sessions,
                         "role instances per agent");
  attack_cmd->add_option("--node-cap", attack_cap, "search budget");
  add_common(attack_cmd, attack_input);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze_cmd->parsed())
      return cmd_analyze(analyze_input, analyze_metric, format, roles_path);
    if (roles_cmd->parsed()) return cmd_roles(roles_input, format, roles_path);
    if (patterns_cmd->parsed())
      return cmd_patterns(patterns_input, format, roles_path);
    if (probe_cmd->parsed())
      return cmd_probe(probe_input, probe_metric, format, probe_opts);
    if (attack_cmd->parsed())
      return cmd_attack(attack_input, attack_secret, attack_sessions,
                        attack_cap, format, roles_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace secan

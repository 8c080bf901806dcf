#include "secan/oracle.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace secan {

namespace {

constexpr std::size_t kStoredViolations = 20;

std::vector<Message> knowledge_messages(const VerificationContext& ctx,
                                        const std::string& agent) {
  std::vector<Message> out;
  auto it = ctx.knowledge.find(agent);
  if (it == ctx.knowledge.end()) return out;
  for (const Atom& a : it->second) out.push_back(Message::atom(a));
  return out;
}

std::optional<SecurityLevel> try_level(const VerificationContext& ctx,
                                       const Atom& a) {
  try {
    return level_of(ctx, a);
  } catch (const UnassignedLevel&) {
    return std::nullopt;
  }
}

// ----- probe -----

class Probe {
 public:
  Probe(const MetricFn& metric, const VerificationContext& ctx,
        const std::vector<Atom>& pool, const ProbeOptions& opts)
      : metric_(metric), ctx_(ctx), pool_(pool), opts_(opts),
        rng_(opts.seed) {
    for (const Atom& a : pool_) {
      if (!try_level(ctx_, a)) continue;
      if (a.is_inverse) {
        enc_keys_.push_back(a);
        continue;
      }
      if (a.sort == Sort::Key) {
        enc_keys_.push_back(a);
        if (level_of(ctx_, a).is_bottom()) payload_.push_back(a);
        continue;
      }
      payload_.push_back(a);
    }
    if (payload_.empty())
      throw Error("probe needs at least one public payload atom");
    auto it = ctx_.knowledge.find(ctx_.intruder);
    if (it != ctx_.knowledge.end())
      intruder_atoms_.assign(it->second.begin(), it->second.end());
  }

  ProbeReport run() {
    ProbeReport report;
    report.trials = opts_.trials;
    for (unsigned t = 0; t < opts_.trials; ++t) trial(report);
    return report;
  }

 private:
  std::size_t pick(std::size_t n) {
    return static_cast<std::size_t>(rng_() % n);
  }

  Message sample_term(unsigned depth) {
    std::size_t roll = pick(10);
    if (depth == 0 || roll < 4 || enc_keys_.empty())
      return Message::atom(payload_[pick(payload_.size())]);
    if (roll < 8)
      return Message::enc(sample_term(depth - 1),
                          Message::atom(enc_keys_[pick(enc_keys_.size())]));
    std::vector<Message> parts;
    std::size_t n = 2 + pick(2);
    for (std::size_t i = 0; i < n; ++i)
      parts.push_back(sample_term(depth - 1));
    return Message::concat(std::move(parts));
  }

  // The intruder may legitimately hold the subject when one of its keys'
  // levels dominates the subject's.
  bool discharged(const Atom& subject) {
    auto [it, fresh] = discharged_.try_emplace(subject.display(), false);
    if (!fresh) return it->second;
    auto subject_level = try_level(ctx_, subject);
    if (!subject_level) return it->second = true;  // nothing to claim
    for (const Atom& k : intruder_atoms_) {
      if (k.sort != Sort::Key) continue;
      auto kl = try_level(ctx_, k);
      if (kl && geq_provable(*kl, *subject_level)) return it->second = true;
    }
    return it->second = false;
  }

  SecurityLevel level_on_set(const Message& subject,
                             const std::vector<Message>& set) {
    SecurityLevel l = SecurityLevel::top();
    for (const Message& m : set) l = meet(l, metric_(subject, m));
    return l;
  }

  void record(ProbeReport& report, ProbeViolation v) {
    ++report.violation_count;
    if (report.violations.size() < kStoredViolations)
      report.violations.push_back(std::move(v));
  }

  void trial(ProbeReport& report) {
    std::vector<Message> set;
    std::size_t n = 1 + pick(opts_.max_set);
    for (std::size_t i = 0; i < n; ++i) set.push_back(sample_term(opts_.depth));

    std::vector<Message> closure_seed = set;
    for (const Atom& a : intruder_atoms_)
      closure_seed.push_back(Message::atom(a));
    DeductionClosure closure(ctx_, std::move(closure_seed));

    std::vector<std::string> rendered;
    for (const Message& m : set) rendered.push_back(m.display());

    std::map<Atom, SecurityLevel> on_set;
    auto set_level = [&](const Atom& a) -> const SecurityLevel& {
      auto it = on_set.find(a);
      if (it == on_set.end())
        it = on_set.emplace(a, level_on_set(Message::atom(a), set)).first;
      return it->second;
    };

    // Derivable atoms must be priced Bottom on the set itself.
    for (const Atom& a : pool_) {
      if (!try_level(ctx_, a) || discharged(a)) continue;
      if (!closure.derives(Message::atom(a))) continue;
      if (!set_level(a).is_bottom())
        record(report, {"anchor", a.display(), rendered, a.display(),
                        SecurityLevel::bottom(), set_level(a)});
    }

    // Derivable messages must not raise any subject's level.
    std::vector<Message> elements(closure.analyzed().begin(),
                                  closure.analyzed().end());
    if (elements.empty()) return;
    std::vector<Atom> usable_keys;
    for (const Atom& a : pool_)
      if (a.sort == Sort::Key && closure.derives(Message::atom(a)))
        usable_keys.push_back(a);

    for (unsigned i = 0; i < 4; ++i) {
      Message m = elements[pick(elements.size())];
      std::size_t roll = pick(3);
      if (roll == 0 && !usable_keys.empty())
        m = Message::enc(m, Message::atom(usable_keys[pick(usable_keys.size())]));
      else if (roll == 1)
        m = Message::concat({m, elements[pick(elements.size())]});

      std::set<Atom> subjects = atoms_of(m);
      for (const Message& member : set) {
        auto more = atoms_of(member);
        subjects.insert(more.begin(), more.end());
      }
      for (const Atom& a : subjects) {
        if (!try_level(ctx_, a) || discharged(a)) continue;
        SecurityLevel on_m = metric_(Message::atom(a), m);
        if (!geq_provable(on_m, set_level(a)))
          record(report, {"invariance", a.display(), rendered, m.display(),
                          on_m, set_level(a)});
      }
    }
  }

  const MetricFn& metric_;
  const VerificationContext& ctx_;
  const std::vector<Atom>& pool_;
  ProbeOptions opts_;
  std::mt19937_64 rng_;
  std::vector<Atom> payload_;
  std::vector<Atom> enc_keys_;
  std::vector<Atom> intruder_atoms_;
  std::map<std::string, bool> discharged_;
};

// ----- attack search -----

Message stamp_session(const Message& m, unsigned session) {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
      return m;
    case Message::Kind::Atom: {
      const Atom& a = m.as_atom();
      if (a.session_fresh && !a.session_run)
        return Message::atom(a.with_session(session));
      return m;
    }
    case Message::Kind::Variable: {
      Variable v = m.as_variable();
      v.name += "#" + std::to_string(session);
      return Message::var(v);
    }
    case Message::Kind::Concat: {
      std::vector<Message> parts;
      for (const Message& p : m.parts())
        parts.push_back(stamp_session(p, session));
      return Message::concat(std::move(parts));
    }
    case Message::Kind::Enc:
      return Message::enc(stamp_session(m.enc_body(), session),
                          stamp_session(m.enc_key(), session));
  }
  return m;
}

void collect_subterms(const Message& m, std::set<Message>& out) {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
      return;
    case Message::Kind::Atom:
    case Message::Kind::Variable:
      out.insert(m);
      return;
    case Message::Kind::Concat:
      out.insert(m);
      for (const Message& p : m.parts()) collect_subterms(p, out);
      return;
    case Message::Kind::Enc:
      out.insert(m);
      collect_subterms(m.enc_body(), out);
      collect_subterms(m.enc_key(), out);
      return;
  }
}

struct SessionInstance {
  std::string agent;
  unsigned session = 0;
  std::vector<RoleRule> rules;
};

class AttackSearch {
 public:
  AttackSearch(const std::vector<GeneralizedRole>& roles,
               const VerificationContext& ctx, const Atom& secret,
               unsigned sessions, std::size_t node_cap)
      : ctx_(ctx), secret_(secret), target_(Message::atom(secret)),
        node_cap_(node_cap) {
    for (const auto& role : roles) {
      for (unsigned s = 1; s <= sessions; ++s) {
        SessionInstance inst;
        inst.agent = role.agent;
        inst.session = s;
        for (const RoleRule& r : role.rules)
          inst.rules.push_back({stamp_session(r.received, s),
                                stamp_session(r.sent, s), r.recv_from,
                                r.send_to});
        instances_.push_back(std::move(inst));
      }
    }
    pc_.assign(instances_.size(), 0);
    bind_.assign(instances_.size(), {});
  }

  std::optional<AttackTrace> run() {
    DeductionClosure closure(ctx_, knowledge_messages(ctx_, ctx_.intruder));
    if (closure.derives(target_)) return AttackTrace{{}, secret_};
    std::vector<AttackStep> steps;
    if (dfs(closure, steps)) return trace_;
    return std::nullopt;
  }

 private:
  void spend() {
    if (++nodes_ > node_cap_)
      throw SearchBudgetExceeded("attack search exceeded " +
                                 std::to_string(node_cap_) + " nodes");
  }

  std::string fingerprint() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      out << i << ':' << pc_[i];
      for (const auto& [v, m] : bind_[i])
        out << ',' << v.display() << '=' << m.display();
      out << ';';
    }
    return out.str();
  }

  static Message apply_map(const std::map<Variable, Message>& map,
                           const Message& m) {
    if (map.empty()) return m;
    return Substitution::make(map).apply(m);
  }

  // Candidate fillers for the receive shape's variables: values a replay of
  // some known ciphertext would put there, plus everything the intruder can
  // derive outright, sort-filtered. A filler the intruder can neither
  // derive nor obtain by forwarding a known encryption whole can never make
  // the instance derivable, so this set is exhaustive.
  std::map<Variable, std::set<Message>> candidates(
      const Message& shape, const std::vector<Variable>& free,
      const std::set<Message>& derivable) {
    std::map<Variable, std::set<Message>> out;
    for (const Variable& v : free) out[v];

    std::set<Message> probes;
    collect_subterms(shape, probes);
    for (const Message& p : probes) {
      if (!p.is_enc() || vars_of(p).empty()) continue;
      for (const Message& e : derivable) {
        auto sigma = match_pattern(p, e);
        if (!sigma) continue;
        for (const auto& [v, value] : sigma->bindings()) {
          auto it = out.find(v);
          if (it != out.end()) it->second.insert(value);
        }
      }
    }

    for (const Message& m : derivable) {
      for (const Variable& v : free) {
        if (v.sort == Sort::Any) {
          if (m.is_atom() || m.is_enc()) out[v].insert(m);
        } else if (m.is_atom() && sort_accepts(v.sort, m)) {
          out[v].insert(m);
        }
      }
    }
    return out;
  }

  bool dfs(const DeductionClosure& closure, std::vector<AttackStep>& steps) {
    spend();
    if (!visited_.insert(fingerprint()).second) return false;

    std::set<Message> universe;
    for (const Message& m : closure.analyzed()) collect_subterms(m, universe);
    std::set<Message> derivable;
    for (const Message& m : universe)
      if (!m.is_variable() && closure.derives(m)) derivable.insert(m);

    for (std::size_t i = 0; i < instances_.size(); ++i) {
      const SessionInstance& inst = instances_[i];
      if (pc_[i] >= inst.rules.size()) continue;
      // Sessions of one role are interchangeable; later instances may only
      // start after the previous one has.
      if (inst.session > 1 && pc_[i - 1] == 0) continue;
      const RoleRule& rule = inst.rules[pc_[i]];
      Message shape = apply_map(bind_[i], rule.received);

      std::set<Variable> shape_vars = vars_of(shape);
      std::vector<Variable> free(shape_vars.begin(), shape_vars.end());
      auto by_var = candidates(shape, free, derivable);
      std::vector<std::vector<Message>> cands;
      for (const Variable& v : free)
        cands.emplace_back(by_var[v].begin(), by_var[v].end());

      std::map<Variable, Message> sigma;
      if (try_fill(i, shape, free, cands, 0, sigma, closure, steps))
        return true;
    }
    return false;
  }

  bool try_fill(std::size_t i, const Message& shape,
                const std::vector<Variable>& free,
                const std::vector<std::vector<Message>>& cands,
                std::size_t idx, std::map<Variable, Message>& sigma,
                const DeductionClosure& closure,
                std::vector<AttackStep>& steps) {
    if (idx == free.size()) {
      Message received = apply_map(sigma, shape);
      spend();
      if (!closure.derives(received)) return false;
      return fire(i, received, sigma, closure, steps);
    }
    for (const Message& c : cands[idx]) {
      sigma[free[idx]] = c;
      if (try_fill(i, shape, free, cands, idx + 1, sigma, closure, steps))
        return true;
      sigma.erase(free[idx]);
    }
    return false;
  }

  bool fire(std::size_t i, const Message& received,
            const std::map<Variable, Message>& sigma,
            const DeductionClosure& closure, std::vector<AttackStep>& steps) {
    const SessionInstance& inst = instances_[i];
    std::map<Variable, Message> saved = bind_[i];
    for (const auto& [v, m] : sigma) bind_[i].emplace(v, m);
    Message sent = apply_map(bind_[i], inst.rules[pc_[i]].sent);
    if (!vars_of(sent).empty())
      throw MalformedSpec("role " + inst.agent +
                          " sends an unbound variable: " + sent.display());
    pc_[i] += 1;
    steps.push_back({inst.agent, inst.session, pc_[i], received, sent});

    bool found = false;
    DeductionClosure next = closure;
    if (!sent.is_epsilon()) {
      next.add(sent);
      if (next.derives(target_)) {
        trace_ = AttackTrace{steps, secret_};
        found = true;
      }
    }
    if (!found) found = dfs(next, steps);

    if (!found) {
      steps.pop_back();
      pc_[i] -= 1;
      bind_[i] = std::move(saved);
    }
    return found;
  }

  const VerificationContext& ctx_;
  Atom secret_;
  Message target_;
  std::size_t node_cap_;
  std::vector<SessionInstance> instances_;
  std::vector<std::size_t> pc_;
  std::vector<std::map<Variable, Message>> bind_;
  std::set<std::string> visited_;
  std::size_t nodes_ = 0;
  AttackTrace trace_;
};

}  // namespace

std::vector<Atom> default_atom_pool(const VerificationContext& ctx,
                                    const ProtocolSpec& spec) {
  std::map<std::string, Atom> by_display;
  auto put = [&](const Atom& a) { by_display.emplace(a.display(), a); };
  for (const auto& p : ctx.principals) put(Atom::identity(p));
  for (const auto& [name, info] : ctx.keys) {
    put(info.key);
    put(inverse_key(ctx, info.key));
  }
  for (const auto& [agent, atoms] : ctx.knowledge)
    for (const Atom& a : atoms) put(a);
  for (const auto& [agent, atoms] : spec.fresh)
    for (const Atom& a : atoms) put(a);
  std::vector<Atom> pool;
  for (const auto& [d, a] : by_display)
    if (try_level(ctx, a)) pool.push_back(a);
  return pool;
}

ProbeReport probe_full_invariance(const MetricFn& metric,
                                  const VerificationContext& ctx,
                                  const std::vector<Atom>& pool,
                                  const ProbeOptions& opts) {
  return Probe(metric, ctx, pool, opts).run();
}

std::optional<AttackTrace> bounded_attack_search(
    const std::vector<GeneralizedRole>& roles, const VerificationContext& ctx,
    const Atom& secret, unsigned sessions, std::size_t node_cap) {
  return AttackSearch(roles, ctx, secret, sessions, node_cap).run();
}

}  // namespace secan

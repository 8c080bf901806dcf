#include "secan/protocol.hpp"

#include <algorithm>

namespace secan {

namespace {

// X, Y, Z, T, then U, V, W, then V1, V2, ... shared across all roles so
// variables stay pairwise distinct.
class VariableNamer {
 public:
  std::string next() {
    static const char* pool[] = {"X", "Y", "Z", "T", "U", "V", "W"};
    if (i_ < 7) return pool[i_++];
    return "V" + std::to_string(i_++ - 6);
  }

 private:
  size_t i_ = 0;
};

// Rewrites an agent's own fresh nonces to their session-indexed form.
Message index_fresh(const Message& m, const std::set<Atom>& fresh) {
  switch (m.kind()) {
    case Message::Kind::Atom: {
      const Atom& a = m.as_atom();
      if (a.sort == Sort::Nonce && fresh.count(a))
        return Message::atom(a.with_session(std::nullopt));
      return m;
    }
    case Message::Kind::Concat: {
      std::vector<Message> out;
      for (const auto& p : m.parts()) out.push_back(index_fresh(p, fresh));
      return Message::concat(std::move(out));
    }
    case Message::Kind::Enc:
      return Message::enc(index_fresh(m.enc_body(), fresh),
                          index_fresh(m.enc_key(), fresh));
    default:
      return m;
  }
}

class RoleBuilder {
 public:
  RoleBuilder(const VerificationContext& ctx, const std::string& agent,
              const std::set<Atom>& fresh, VariableNamer& namer)
      : ctx_(ctx), agent_(agent), namer_(namer) {
    auto it = ctx.knowledge.find(agent);
    if (it != ctx.knowledge.end())
      for (const auto& a : it->second) known_.push_back(Message::atom(a));
    for (const auto& a : fresh) {
      fresh_.insert(a);
      Atom held = a.sort == Sort::Nonce ? a.with_session(std::nullopt) : a;
      known_.push_back(Message::atom(held));
    }
  }

  Message on_receive(const Message& m) {
    Message abs = abstract(index_fresh(m, fresh_));
    for (const auto& c : abs.components()) learn(c);
    return abs;
  }

  Message on_send(const Message& m) {
    Message abs = rewrite(index_fresh(m, fresh_));
    if (!agent_can_derive(ctx_, agent_, abs, known_))
      throw MalformedSpec("agent " + agent_ + " cannot derive sent message " +
                          abs.display());
    return abs;
  }

  std::vector<Variable> variables() const { return vars_; }

 private:
  bool can_derive(const Message& m) const {
    return agent_can_derive(ctx_, agent_, m, known_);
  }

  bool can_decrypt(const Message& enc) const {
    const Message& k = enc.enc_key();
    if (!k.is_atom() || !ctx_.keys.count(k.as_atom().name)) return false;
    return can_derive(Message::atom(inverse_key(ctx_, k.as_atom())));
  }

  Message fresh_var(Sort sort, const Message& replaced) {
    Variable v{namer_.next(), sort, {}, {}};
    vars_.push_back(v);
    Message vm = Message::var(v);
    map_.emplace(replaced, vm);
    known_.push_back(vm);
    return vm;
  }

  // Replaces every maximal subterm the agent can neither derive nor check.
  Message abstract(const Message& m) {
    auto hit = map_.find(m);
    if (hit != map_.end()) return hit->second;
    switch (m.kind()) {
      case Message::Kind::Atom:
        if (can_derive(m)) return m;
        return fresh_var(m.as_atom().sort, m);
      case Message::Kind::Concat: {
        std::vector<Message> out;
        for (const auto& p : m.parts()) out.push_back(abstract(p));
        return Message::concat(std::move(out));
      }
      case Message::Kind::Enc:
        if (can_decrypt(m))
          return Message::enc(abstract(m.enc_body()), m.enc_key());
        if (can_derive(m)) return m;
        return fresh_var(Sort::Any, m);
      default:
        return m;
    }
  }

  void learn(const Message& m) {
    known_.push_back(m);
  }

  // Maps learned subterms back to their variables in sent messages.
  Message rewrite(const Message& m) {
    auto hit = map_.find(m);
    if (hit != map_.end()) return hit->second;
    switch (m.kind()) {
      case Message::Kind::Concat: {
        std::vector<Message> out;
        for (const auto& p : m.parts()) out.push_back(rewrite(p));
        return Message::concat(std::move(out));
      }
      case Message::Kind::Enc:
        return Message::enc(rewrite(m.enc_body()), m.enc_key());
      default:
        return m;
    }
  }

  const VerificationContext& ctx_;
  std::string agent_;
  std::set<Atom> fresh_;
  VariableNamer& namer_;
  std::vector<Message> known_;
  std::map<Message, Message> map_;  // concrete subterm -> variable
  std::vector<Variable> vars_;
};

}  // namespace

std::vector<GeneralizedRole> extract_generalized_roles(
    const ProtocolSpec& spec, const VerificationContext& ctx) {
  unsigned last_id = 0;
  std::set<std::string> agents;
  for (const auto& step : spec.steps) {
    if (step.id <= last_id)
      throw MalformedSpec("step ids must be strictly increasing");
    last_id = step.id;
    if (!ctx.is_principal(step.sender))
      throw MalformedSpec("unknown sender: " + step.sender);
    if (!ctx.is_principal(step.receiver))
      throw MalformedSpec("unknown receiver: " + step.receiver);
    if (!step.message.ground())
      throw MalformedSpec("protocol steps must be ground");
    agents.insert(step.sender);
    agents.insert(step.receiver);
  }

  VariableNamer namer;
  std::vector<GeneralizedRole> roles;
  for (const auto& agent : agents) {  // std::set: sorted by name
    static const std::set<Atom> no_fresh;
    auto fit = spec.fresh.find(agent);
    const std::set<Atom>& fresh = fit == spec.fresh.end() ? no_fresh : fit->second;
    RoleBuilder builder(ctx, agent, fresh, namer);

    GeneralizedRole role;
    role.agent = agent;
    Message pending_recv = Message::epsilon();
    std::optional<std::string> pending_from;
    for (const auto& step : spec.steps) {
      if (step.receiver == agent) {
        Message abs = builder.on_receive(step.message);
        pending_recv = Message::concat({pending_recv, abs});
        pending_from = step.sender;
      } else if (step.sender == agent) {
        RoleRule rule;
        rule.received = pending_recv;
        rule.recv_from = pending_from;
        rule.sent = builder.on_send(step.message);
        rule.send_to = step.receiver;
        role.rules.push_back(std::move(rule));
        pending_recv = Message::epsilon();
        pending_from.reset();
      }
    }
    if (!pending_recv.is_epsilon()) {
      RoleRule rule;
      rule.received = pending_recv;
      rule.recv_from = pending_from;
      rule.sent = Message::epsilon();
      role.rules.push_back(std::move(rule));
    }
    role.variables = builder.variables();
    roles.push_back(std::move(role));
  }
  return roles;
}

std::vector<EncryptionPattern> encryption_patterns(
    const std::vector<GeneralizedRole>& roles) {
  std::vector<EncryptionPattern> out;
  unsigned index = 0;
  for (const auto& role : roles) {
    for (size_t r = 0; r < role.rules.size(); ++r) {
      auto add = [&](const Message& m, bool from_receive) {
        for (const auto& c : m.components()) {
          if (!c.is_enc()) continue;
          EncryptionPattern p;
          p.index = ++index;
          p.term = rename_with_index(c, p.index);
          p.role = role.agent;
          p.rule = r + 1;
          p.from_receive = from_receive;
          out.push_back(std::move(p));
        }
      };
      add(role.rules[r].received, true);
      add(role.rules[r].sent, false);
    }
  }
  return out;
}

std::vector<PatternSource> sources_of(
    const Message& m, const std::vector<EncryptionPattern>& patterns) {
  std::vector<PatternSource> out;
  for (const auto& p : patterns) {
    if (auto sigma = match_pattern(p.term, m))
      out.push_back(PatternSource{&p, std::move(*sigma)});
  }
  return out;
}

void validate_roles(const std::vector<GeneralizedRole>& roles,
                    const VerificationContext& ctx) {
  std::set<Variable> seen_anywhere;
  for (const auto& role : roles) {
    if (!ctx.is_principal(role.agent))
      throw MalformedSpec("role agent not a principal: " + role.agent);
    std::set<Variable> received;
    for (const auto& rule : role.rules) {
      for (const auto& v : vars_of(rule.received)) {
        if (seen_anywhere.count(v) && !received.count(v))
          throw MalformedSpec("variable " + v.display() +
                              " is shared across roles");
        received.insert(v);
        seen_anywhere.insert(v);
      }
      for (const auto& v : vars_of(rule.sent)) {
        if (!received.count(v))
          throw MalformedSpec("variable " + v.display() +
                              " is sent before being received");
      }
    }
  }
}

}  // namespace secan

#include "secan/term.hpp"

#include <algorithm>
#include <sstream>

namespace secan {

std::string to_string(Sort s) {
  switch (s) {
    case Sort::Identity: return "identity";
    case Sort::Nonce: return "nonce";
    case Sort::Key: return "key";
    case Sort::Secret: return "secret";
    case Sort::Any: return "any";
  }
  return "?";
}

Atom Atom::identity(std::string n) { return Atom{std::move(n), Sort::Identity}; }
Atom Atom::nonce(std::string n) { return Atom{std::move(n), Sort::Nonce}; }
Atom Atom::secret(std::string n) { return Atom{std::move(n), Sort::Secret}; }

Atom Atom::key(std::string n, std::optional<std::string> owner, bool inverse) {
  Atom a;
  a.name = std::move(n);
  a.sort = Sort::Key;
  a.owner = std::move(owner);
  a.is_inverse = inverse;
  return a;
}

Atom Atom::with_session(std::optional<unsigned> run) const {
  Atom a = *this;
  a.session_fresh = true;
  a.session_run = run;
  return a;
}

std::string Atom::display() const {
  std::string s = name;
  if (is_inverse) s += "^-1";
  if (session_fresh) {
    s += "^";
    s += session_run ? std::to_string(*session_run) : "i";
  }
  return s;
}

std::string Variable::display() const {
  std::string s;
  if (sort == Sort::Key && key_owner) {
    s = "K_" + *key_owner;
  } else {
    s = name;
  }
  if (pattern_index) s += "_" + std::to_string(*pattern_index);
  return s;
}

struct Message::Node {
  Kind kind;
  Atom atom;                    // Kind::Atom
  Variable var;                 // Kind::Variable
  std::vector<Message> parts;   // Kind::Concat
  Message body;                 // Kind::Enc
  Message key;                  // Kind::Enc
};

Message::Message() : node_(nullptr) {}

Message Message::epsilon() { return Message(); }

Message Message::atom(Atom a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->atom = std::move(a);
  return Message(std::move(n));
}

Message Message::var(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var = std::move(v);
  return Message(std::move(n));
}

Message Message::concat(std::vector<Message> parts) {
  std::vector<Message> flat;
  for (auto& p : parts) {
    if (p.is_epsilon()) continue;
    if (p.is_concat()) {
      const auto& inner = p.parts();
      flat.insert(flat.end(), inner.begin(), inner.end());
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return epsilon();
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Concat;
  n->parts = std::move(flat);
  return Message(std::move(n));
}

Message Message::enc(Message body, Message key) {
  bool ok = (key.is_atom() && key.as_atom().sort == Sort::Key) ||
            (key.is_variable() && key.as_variable().sort == Sort::Key);
  if (!ok) throw SortError("encryption key must be a key atom or key variable");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Enc;
  n->body = std::move(body);
  n->key = std::move(key);
  return Message(std::move(n));
}

Message::Kind Message::kind() const {
  return node_ ? node_->kind : Kind::Epsilon;
}

const Atom& Message::as_atom() const {
  if (!is_atom()) throw Error("message is not an atom");
  return node_->atom;
}

const Variable& Message::as_variable() const {
  if (!is_variable()) throw Error("message is not a variable");
  return node_->var;
}

const std::vector<Message>& Message::parts() const {
  if (!is_concat()) throw Error("message is not a concatenation");
  return node_->parts;
}

const Message& Message::enc_body() const {
  if (!is_enc()) throw Error("message is not an encryption");
  return node_->body;
}

const Message& Message::enc_key() const {
  if (!is_enc()) throw Error("message is not an encryption");
  return node_->key;
}

std::vector<Message> Message::components() const {
  if (is_epsilon()) return {};
  if (is_concat()) return parts();
  return {*this};
}

bool Message::ground() const {
  switch (kind()) {
    case Kind::Epsilon:
    case Kind::Atom:
      return true;
    case Kind::Variable:
      return false;
    case Kind::Concat:
      return std::all_of(parts().begin(), parts().end(),
                         [](const Message& p) { return p.ground(); });
    case Kind::Enc:
      return enc_body().ground() && enc_key().ground();
  }
  return true;
}

bool Message::contains(const Message& sub) const {
  if (*this == sub) return true;
  switch (kind()) {
    case Kind::Concat:
      return std::any_of(parts().begin(), parts().end(),
                         [&](const Message& p) { return p.contains(sub); });
    case Kind::Enc:
      return enc_body().contains(sub) || enc_key().contains(sub);
    default:
      return false;
  }
}

bool operator==(const Message& a, const Message& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Message::Kind::Epsilon: return true;
    case Message::Kind::Atom: return a.as_atom() == b.as_atom();
    case Message::Kind::Variable: return a.as_variable() == b.as_variable();
    case Message::Kind::Concat: {
      const auto& pa = a.parts();
      const auto& pb = b.parts();
      if (pa.size() != pb.size()) return false;
      for (size_t i = 0; i < pa.size(); ++i)
        if (!(pa[i] == pb[i])) return false;
      return true;
    }
    case Message::Kind::Enc:
      return a.enc_body() == b.enc_body() && a.enc_key() == b.enc_key();
  }
  return false;
}

bool operator<(const Message& a, const Message& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  switch (a.kind()) {
    case Message::Kind::Epsilon: return false;
    case Message::Kind::Atom: return a.as_atom() < b.as_atom();
    case Message::Kind::Variable: return a.as_variable() < b.as_variable();
    case Message::Kind::Concat: {
      const auto& pa = a.parts();
      const auto& pb = b.parts();
      return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(),
                                          pb.end());
    }
    case Message::Kind::Enc:
      if (a.enc_body() < b.enc_body()) return true;
      if (b.enc_body() < a.enc_body()) return false;
      return a.enc_key() < b.enc_key();
  }
  return false;
}

std::string Message::display() const {
  switch (kind()) {
    case Kind::Epsilon:
      return "epsilon";
    case Kind::Atom:
      return as_atom().display();
    case Kind::Variable:
      return as_variable().display();
    case Kind::Concat: {
      std::string s;
      for (size_t i = 0; i < parts().size(); ++i) {
        if (i) s += ".";
        s += parts()[i].display();
      }
      return s;
    }
    case Kind::Enc:
      return "{" + enc_body().display() + "}_" + enc_key().display();
  }
  return "?";
}

namespace {

void collect_atoms(const Message& m, std::set<Atom>& out) {
  switch (m.kind()) {
    case Message::Kind::Atom:
      out.insert(m.as_atom());
      break;
    case Message::Kind::Concat:
      for (const auto& p : m.parts()) collect_atoms(p, out);
      break;
    case Message::Kind::Enc:
      collect_atoms(m.enc_body(), out);
      collect_atoms(m.enc_key(), out);
      break;
    default:
      break;
  }
}

void collect_vars(const Message& m, std::set<Variable>& out) {
  switch (m.kind()) {
    case Message::Kind::Variable:
      out.insert(m.as_variable());
      break;
    case Message::Kind::Concat:
      for (const auto& p : m.parts()) collect_vars(p, out);
      break;
    case Message::Kind::Enc:
      collect_vars(m.enc_body(), out);
      collect_vars(m.enc_key(), out);
      break;
    default:
      break;
  }
}

}  // namespace

std::set<Atom> atoms_of(const Message& m) {
  std::set<Atom> out;
  collect_atoms(m, out);
  return out;
}

namespace {

void walk_occurrences(const Message& m, const Message& subject,
                      std::vector<Message>& chain,
                      std::vector<Occurrence>& out) {
  if (m == subject) {
    out.push_back(Occurrence{chain});
    return;
  }
  switch (m.kind()) {
    case Message::Kind::Concat:
      for (const auto& p : m.parts())
        walk_occurrences(p, subject, chain, out);
      break;
    case Message::Kind::Enc:
      chain.push_back(m);
      walk_occurrences(m.enc_body(), subject, chain, out);
      chain.pop_back();
      walk_occurrences(m.enc_key(), subject, chain, out);
      break;
    default:
      break;
  }
}

}  // namespace

std::vector<Occurrence> occurrences_of(const Message& m,
                                       const Message& subject) {
  std::vector<Occurrence> out;
  std::vector<Message> chain;
  walk_occurrences(m, subject, chain, out);
  return out;
}

std::set<Variable> vars_of(const Message& m) {
  std::set<Variable> out;
  collect_vars(m, out);
  return out;
}

bool sort_accepts(Sort s, const Message& m) {
  if (s == Sort::Any) return true;
  if (m.is_atom()) return m.as_atom().sort == s;
  if (m.is_variable()) return m.as_variable().sort == s;
  return false;
}

Substitution Substitution::make(std::map<Variable, Message> bindings) {
  for (const auto& [v, m] : bindings) {
    if (!sort_accepts(v.sort, m))
      throw SortError("binding for " + v.display() + " violates sort " +
                      to_string(v.sort));
    for (const auto& [w, _] : bindings) {
      if (m.contains(Message::var(w)))
        throw Error("substitution is not idempotent: " + w.display() +
                    " occurs in a range");
    }
  }
  Substitution s;
  s.map_ = std::move(bindings);
  return s;
}

std::optional<Message> Substitution::lookup(const Variable& v) const {
  auto it = map_.find(v);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

Message Substitution::apply(const Message& m) const {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
    case Message::Kind::Atom:
      return m;
    case Message::Kind::Variable: {
      auto it = map_.find(m.as_variable());
      return it == map_.end() ? m : it->second;
    }
    case Message::Kind::Concat: {
      std::vector<Message> out;
      out.reserve(m.parts().size());
      for (const auto& p : m.parts()) out.push_back(apply(p));
      return Message::concat(std::move(out));
    }
    case Message::Kind::Enc:
      return Message::enc(apply(m.enc_body()), apply(m.enc_key()));
  }
  return m;
}

Substitution Substitution::without(const Variable& v) const {
  Substitution s = *this;
  s.map_.erase(v);
  return s;
}

std::string Substitution::display() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [v, m] : map_) {
    if (!first) s += ", ";
    first = false;
    s += v.display() + " -> " + m.display();
  }
  return s + "}";
}

namespace {

// Shared solver for unification and one-sided matching. In matching mode
// only the pattern's variables (plus owner-link variables of its key
// variables) may be bound; everything on the target side is rigid.
class Solver {
 public:
  Solver() = default;

  explicit Solver(const Message& pattern) : matching_(true) {
    for (const auto& v : vars_of(pattern)) {
      bindable_.insert(v);
      if (v.key_owner)
        bindable_.insert(Variable{*v.key_owner, Sort::Identity,
                                  v.pattern_index, {}});
    }
  }

  bool solve(const Message& a, const Message& b) {
    Message x = walk(a);
    Message y = walk(b);
    if (x == y) return true;
    if (x.is_variable() && y.is_variable())
      return bind_preferred(x.as_variable(), y.as_variable());
    if (x.is_variable()) return bind(x.as_variable(), y);
    if (y.is_variable()) return bind(y.as_variable(), x);
    if (x.kind() != y.kind()) return false;
    switch (x.kind()) {
      case Message::Kind::Atom:
        return x.as_atom() == y.as_atom();
      case Message::Kind::Concat: {
        const auto& px = x.parts();
        const auto& py = y.parts();
        if (px.size() != py.size()) return false;
        for (size_t i = 0; i < px.size(); ++i)
          if (!solve(px[i], py[i])) return false;
        return true;
      }
      case Message::Kind::Enc:
        return solve(x.enc_body(), y.enc_body()) &&
               solve(x.enc_key(), y.enc_key());
      default:
        return false;
    }
  }

  std::optional<Substitution> result() {
    // Normalize the triangular bindings to an idempotent substitution.
    std::map<Variable, Message> out;
    for (const auto& [v, m] : bind_) out.emplace(v, resolve(m));
    return Substitution::make(std::move(out));
  }

 private:
  Message walk(const Message& m) {
    Message cur = m;
    while (cur.is_variable()) {
      auto it = bind_.find(cur.as_variable());
      if (it == bind_.end()) break;
      cur = it->second;
    }
    return cur;
  }

  Message resolve(const Message& m) {
    switch (m.kind()) {
      case Message::Kind::Variable: {
        auto it = bind_.find(m.as_variable());
        return it == bind_.end() ? m : resolve(it->second);
      }
      case Message::Kind::Concat: {
        std::vector<Message> out;
        for (const auto& p : m.parts()) out.push_back(resolve(p));
        return Message::concat(std::move(out));
      }
      case Message::Kind::Enc:
        return Message::enc(resolve(m.enc_body()), resolve(m.enc_key()));
      default:
        return m;
    }
  }

  bool occurs(const Variable& v, const Message& m) {
    Message w = walk(m);
    switch (w.kind()) {
      case Message::Kind::Variable:
        return w.as_variable() == v;
      case Message::Kind::Concat:
        return std::any_of(w.parts().begin(), w.parts().end(),
                           [&](const Message& p) { return occurs(v, p); });
      case Message::Kind::Enc:
        return occurs(v, w.enc_body()) || occurs(v, w.enc_key());
      default:
        return false;
    }
  }

  // Variable-variable case: prefer putting an indexed (pattern) variable in
  // the domain so unifiers read pattern -> message, as reports display them.
  bool bind_preferred(const Variable& a, const Variable& b) {
    bool a_first = a.pattern_index.has_value() || !b.pattern_index.has_value();
    const Variable& dom = a_first ? a : b;
    const Variable& rng = a_first ? b : a;
    if (bound_allowed(dom) && sort_accepts(dom.sort, Message::var(rng)))
      return bind(dom, Message::var(rng));
    return bind(rng, Message::var(dom));
  }

  bool bound_allowed(const Variable& v) const {
    return !matching_ || bindable_.count(v) > 0;
  }

  bool bind(const Variable& v, const Message& m) {
    if (!bound_allowed(v)) return false;
    if (!sort_accepts(v.sort, m)) return false;
    if (occurs(v, m)) return false;
    bind_.emplace(v, m);
    // An owner-linked key variable bound to an owned key atom forces the
    // linked identity variable's binding as well.
    if (v.key_owner && m.is_atom()) {
      const Atom& k = m.as_atom();
      if (k.owner) {
        Variable link{*v.key_owner, Sort::Identity, v.pattern_index, {}};
        if (!solve(Message::var(link), Message::atom(Atom::identity(*k.owner))))
          return false;
      }
    }
    return true;
  }

  bool matching_ = false;
  std::set<Variable> bindable_;
  std::map<Variable, Message> bind_;
};

}  // namespace

std::optional<Substitution> unify(const Message& a, const Message& b) {
  Solver s;
  if (!s.solve(a, b)) return std::nullopt;
  return s.result();
}

std::optional<Substitution> match_pattern(const Message& pattern,
                                          const Message& target) {
  Solver s(pattern);
  if (!s.solve(pattern, target)) return std::nullopt;
  return s.result();
}

namespace {

Message derive_impl(const Message& m, const Variable* keep) {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
    case Message::Kind::Atom:
      return m;
    case Message::Kind::Variable:
      if (keep && m.as_variable() == *keep) return m;
      return Message::epsilon();
    case Message::Kind::Concat: {
      std::vector<Message> out;
      for (const auto& p : m.parts()) out.push_back(derive_impl(p, keep));
      return Message::concat(std::move(out));
    }
    case Message::Kind::Enc: {
      Message body = derive_impl(m.enc_body(), keep);
      if (body.is_epsilon()) return Message::epsilon();
      Message key = derive_impl(m.enc_key(), keep);
      if (key.is_epsilon()) return Message::epsilon();
      return Message::enc(std::move(body), std::move(key));
    }
  }
  return m;
}

}  // namespace

Message derive(const Message& m) { return derive_impl(m, nullptr); }

Message derive_keep(const Message& m, const Variable& keep) {
  return derive_impl(m, &keep);
}

Message rename_with_index(const Message& m, unsigned index) {
  switch (m.kind()) {
    case Message::Kind::Epsilon:
      return m;
    case Message::Kind::Atom: {
      const Atom& a = m.as_atom();
      Variable v;
      v.name = a.name;
      if (a.is_inverse) v.name = "inv:" + v.name;
      v.sort = a.sort;
      v.pattern_index = index;
      if (a.sort == Sort::Key) v.key_owner = a.owner;
      return Message::var(std::move(v));
    }
    case Message::Kind::Variable: {
      Variable v = m.as_variable();
      v.pattern_index = index;
      return Message::var(std::move(v));
    }
    case Message::Kind::Concat: {
      std::vector<Message> out;
      for (const auto& p : m.parts()) out.push_back(rename_with_index(p, index));
      return Message::concat(std::move(out));
    }
    case Message::Kind::Enc:
      return Message::enc(rename_with_index(m.enc_body(), index),
                          rename_with_index(m.enc_key(), index));
  }
  return m;
}

}  // namespace secan

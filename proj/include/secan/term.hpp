// Message algebra: atoms, variables, concatenation and encryption, plus the
// operations the analyzer is built on (substitution, unification, matching,
// variable derivation, index renaming).
#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace secan {

// Root of the analyzer's error hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SortError : public Error {
 public:
  using Error::Error;
};

enum class Sort { Identity, Nonce, Key, Secret, Any };

std::string to_string(Sort s);

// Ground symbol. Keys may carry an owner (public-key pairs declared per
// principal) and an inverse flag; fresh nonces may carry a session index,
// where an absent run number denotes the formal per-session index i.
struct Atom {
  std::string name;
  Sort sort = Sort::Nonce;                // never Any
  bool session_fresh = false;             // true: rendered name^i / name^run
  std::optional<unsigned> session_run;    // concrete run, absent = formal i
  std::optional<std::string> owner;       // keys only
  bool is_inverse = false;                // keys only

  auto operator<=>(const Atom&) const = default;

  static Atom identity(std::string n);
  static Atom nonce(std::string n);
  static Atom secret(std::string n);
  static Atom key(std::string n, std::optional<std::string> owner = {},
                  bool inverse = false);

  Atom with_session(std::optional<unsigned> run) const;
  std::string display() const;
};

// Placeholder standing for a value an agent could not derive or check, or
// for a renamed slot of an encryption pattern. Equality ignores key_owner:
// the link is derived data used to force the owning identity's binding.
struct Variable {
  std::string name;
  Sort sort = Sort::Any;
  std::optional<unsigned> pattern_index;
  std::optional<std::string> key_owner;   // identity name, key variables only

  friend bool operator==(const Variable& a, const Variable& b) {
    return a.name == b.name && a.sort == b.sort &&
           a.pattern_index == b.pattern_index;
  }
  friend auto operator<=>(const Variable& a, const Variable& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    if (auto c = a.sort <=> b.sort; c != 0) return c;
    return a.pattern_index <=> b.pattern_index;
  }

  std::string display() const;
};

// Immutable message tree. The empty message epsilon is the identity of
// concatenation and the result of deriving a lone variable away.
class Message {
 public:
  enum class Kind { Epsilon, Atom, Variable, Concat, Enc };

  Message();  // epsilon

  static Message epsilon();
  static Message atom(Atom a);
  static Message var(Variable v);
  // Flattens nested concatenations, drops epsilon parts, collapses
  // singleton lists; an empty list yields epsilon.
  static Message concat(std::vector<Message> parts);
  // key must be an atom or variable of sort Key (SortError otherwise).
  static Message enc(Message body, Message key);

  Kind kind() const;
  bool is_epsilon() const { return kind() == Kind::Epsilon; }
  bool is_atom() const { return kind() == Kind::Atom; }
  bool is_variable() const { return kind() == Kind::Variable; }
  bool is_concat() const { return kind() == Kind::Concat; }
  bool is_enc() const { return kind() == Kind::Enc; }

  const Atom& as_atom() const;
  const Variable& as_variable() const;
  const std::vector<Message>& parts() const;   // Concat only
  const Message& enc_body() const;             // Enc only
  const Message& enc_key() const;              // Enc only

  // Top-level components: parts() for a concatenation, {*this} otherwise,
  // empty for epsilon.
  std::vector<Message> components() const;

  bool ground() const;
  bool contains(const Message& sub) const;

  friend bool operator==(const Message& a, const Message& b);
  friend bool operator!=(const Message& a, const Message& b) { return !(a == b); }
  friend bool operator<(const Message& a, const Message& b);

  // {A.Na^i.S.B}_ks style rendering used by reports.
  std::string display() const;

 private:
  struct Node;
  explicit Message(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;  // null = epsilon
};

std::set<Atom> atoms_of(const Message& m);
std::set<Variable> vars_of(const Message& m);

// One occurrence of a subject atom or variable, with the encryptions that
// protect it, outermost first. A key position is protected only by the
// layers above its own ciphertext.
struct Occurrence {
  std::vector<Message> enclosing;  // Enc messages
};

std::vector<Occurrence> occurrences_of(const Message& m,
                                       const Message& subject);

// True when a variable of sort s may bind m: Any accepts anything, the
// named sorts accept atoms or variables of the same sort only.
bool sort_accepts(Sort s, const Message& m);

// Idempotent sort-respecting variable binding. Construction validates sort
// compatibility (SortError) and that no domain variable occurs in a range.
class Substitution {
 public:
  Substitution() = default;

  // Throws SortError / Error on an ill-formed binding set.
  static Substitution make(std::map<Variable, Message> bindings);

  const std::map<Variable, Message>& bindings() const { return map_; }
  bool empty() const { return map_.empty(); }
  std::optional<Message> lookup(const Variable& v) const;

  Message apply(const Message& m) const;
  // Same map minus one variable's binding (static-neighborhood builds).
  Substitution without(const Variable& v) const;

  std::string display() const;

 private:
  std::map<Variable, Message> map_;
};

// Most general sort-respecting syntactic unifier of two messages, with
// occurs check. Key variables carrying an owner link force the linked
// identity binding when they meet an owned key atom. Returns nothing when
// no unifier exists.
std::optional<Substitution> unify(const Message& a, const Message& b);

// One-sided variant: binds only the pattern's variables; the target's
// variables are treated as constants. sigma such that apply(pattern) ==
// target up to the target's own variables left in place.
std::optional<Substitution> match_pattern(const Message& pattern,
                                          const Message& target);

// Variable erasure: drops every variable occurrence, compacts
// concatenations, deletes encryptions whose body (or key) was erased.
// Result is variable-free; the empty result is epsilon.
Message derive(const Message& m);

// Same erasure but the given variable is kept in place.
Message derive_keep(const Message& m, const Variable& keep);

// Replaces every atom and variable with a fresh variable of the same sort
// carrying the given pattern index and the original name; key atoms with an
// owner produce key variables linked to the owner's identity variable.
Message rename_with_index(const Message& m, unsigned index);

}  // namespace secan

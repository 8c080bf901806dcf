#include "secan/dsl.hpp"

#include <cctype>

namespace secan {

namespace {

struct Token {
  enum class Type { Ident, Number, Punct, End };
  Type type = Type::End;
  std::string text;
  unsigned line = 1;
  unsigned col = 1;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  unsigned line = 1, col = 1;
  std::size_t i = 0;
  auto bump = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') bump(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(c);
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.type = Token::Type::Ident;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) ||
              text[i] == '_')) {
        t.text += text[i];
        bump(text[i++]);
      }
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.type = Token::Type::Number;
      while (i < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i]))) {
        t.text += text[i];
        bump(text[i++]);
      }
    } else if (c == '-') {
      if (i + 1 >= text.size() || text[i + 1] != '>')
        throw ParseError("expected '->'", line, col);
      t.type = Token::Type::Punct;
      t.text = "->";
      bump(text[i++]);
      bump(text[i++]);
    } else if (std::string("{}(),;:.=?^").find(c) != std::string::npos) {
      t.type = Token::Type::Punct;
      t.text = std::string(1, c);
      bump(text[i++]);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line,
                       col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.type = Token::Type::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().type == Token::Type::End; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }

  bool accept_punct(const std::string& p) {
    if (peek().type == Token::Type::Punct && peek().text == p) {
      next();
      return true;
    }
    return false;
  }

  void expect_punct(const std::string& p) {
    if (!accept_punct(p)) fail("expected '" + p + "'");
  }

  std::string expect_ident(const std::string& what) {
    if (peek().type != Token::Type::Ident) fail("expected " + what);
    return next().text;
  }

  unsigned expect_number() {
    if (peek().type != Token::Type::Number) fail("expected a number");
    return static_cast<unsigned>(std::stoul(next().text));
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::optional<Sort> sort_by_name(const std::string& s) {
  if (s == "identity") return Sort::Identity;
  if (s == "nonce") return Sort::Nonce;
  if (s == "key") return Sort::Key;
  if (s == "secret") return Sort::Secret;
  if (s == "any") return Sort::Any;
  return std::nullopt;
}

// Shared by the file parser and parse_term_in.
class TermParser {
 public:
  TermParser(TokenStream& ts, const std::map<std::string, Atom>& symbols,
             const VerificationContext& ctx,
             std::map<std::string, Variable>& vars,
             std::vector<Variable>* order)
      : ts_(ts), symbols_(symbols), ctx_(ctx), vars_(vars), order_(order) {}

  Message term() {
    std::vector<Message> parts{part()};
    while (ts_.accept_punct(".")) parts.push_back(part());
    return Message::concat(std::move(parts));
  }

 private:
  Message part() {
    if (ts_.accept_punct("?")) return variable();
    const Token& t = ts_.peek();
    if (t.type != Token::Type::Ident) ts_.fail("expected a term");
    if (t.text == "epsilon") {
      ts_.next();
      return Message::epsilon();
    }
    if (t.text == "enc") {
      ts_.next();
      ts_.expect_punct("(");
      Message body = term();
      ts_.expect_punct(",");
      Message key = keyref();
      ts_.expect_punct(")");
      return Message::enc(std::move(body), std::move(key));
    }
    return atomref();
  }

  Message atomref() {
    Atom a = resolve(ts_.expect_ident("an atom name"));
    if (ts_.accept_punct("^")) {
      if (a.sort != Sort::Nonce)
        ts_.fail("session index on non-nonce " + a.name);
      if (ts_.peek().type == Token::Type::Number) {
        a = a.with_session(ts_.expect_number());
      } else if (ts_.peek().type == Token::Type::Ident &&
                 ts_.peek().text == "i") {
        ts_.next();
        a = a.with_session(std::nullopt);
      } else {
        ts_.fail("expected a session number or 'i'");
      }
    }
    return Message::atom(a);
  }

  Message keyref() {
    if (ts_.accept_punct("?")) {
      Message v = variable();
      if (v.as_variable().sort != Sort::Key)
        ts_.fail("key position needs a ?name:key variable");
      return v;
    }
    if (ts_.peek().type == Token::Type::Ident && ts_.peek().text == "inv") {
      ts_.next();
      ts_.expect_punct("(");
      Atom k = resolve(ts_.expect_ident("a key name"));
      ts_.expect_punct(")");
      if (k.sort != Sort::Key) ts_.fail("inv() needs a key");
      return Message::atom(inverse_key(ctx_, k));
    }
    Atom k = resolve(ts_.expect_ident("a key name"));
    if (k.sort != Sort::Key) ts_.fail(k.name + " is not a key");
    return Message::atom(k);
  }

  Message variable() {
    std::string name = ts_.expect_ident("a variable name");
    std::optional<Sort> annotated;
    if (ts_.accept_punct(":")) {
      std::string s = ts_.expect_ident("a sort name");
      annotated = sort_by_name(s);
      if (!annotated) ts_.fail("unknown sort '" + s + "'");
    }
    auto it = vars_.find(name);
    if (it != vars_.end()) {
      if (annotated && *annotated != it->second.sort)
        ts_.fail("variable ?" + name + " reannotated with a different sort");
      return Message::var(it->second);
    }
    Variable v{name, annotated.value_or(Sort::Any), {}, {}};
    vars_.emplace(name, v);
    if (order_) order_->push_back(v);
    return Message::var(v);
  }

  Atom resolve(const std::string& name) {
    auto it = symbols_.find(name);
    if (it == symbols_.end()) ts_.fail("unknown identifier '" + name + "'");
    return it->second;
  }

  TokenStream& ts_;
  const std::map<std::string, Atom>& symbols_;
  const VerificationContext& ctx_;
  std::map<std::string, Variable>& vars_;
  std::vector<Variable>* order_;
};

class InputParser {
 public:
  explicit InputParser(const std::string& text) : ts_(lex(text)) {}

  ParsedInput run() {
    while (!ts_.at_end()) {
      std::string section = ts_.expect_ident("a section name");
      if (section == "principals") principals();
      else if (section == "intruder") intruder();
      else if (section == "keys") keys();
      else if (section == "fresh") fresh();
      else if (section == "levels") levels();
      else if (section == "knows") knows();
      else if (section == "protocol") protocol();
      else if (section == "roles") roles();
      else ts_.fail("unknown section '" + section + "'");
    }
    if (out_.ctx.intruder.empty()) ts_.fail("missing intruder section");
    if (out_.spec.steps.empty() && !out_.roles)
      ts_.fail("input needs a protocol or roles section");
    if (out_.roles) validate_roles(*out_.roles, out_.ctx);
    return std::move(out_);
  }

 private:
  void declare(const std::string& name, Atom a) {
    if (!out_.symbols.emplace(name, std::move(a)).second)
      ts_.fail("'" + name + "' is already declared");
  }

  std::string expect_principal() {
    std::string name = ts_.expect_ident("a principal name");
    if (!out_.ctx.is_principal(name))
      ts_.fail("'" + name + "' is not a principal");
    return name;
  }

  void principals() {
    do {
      std::string name = ts_.expect_ident("a principal name");
      declare(name, Atom::identity(name));
      out_.ctx.principals.insert(name);
    } while (ts_.accept_punct(","));
    ts_.expect_punct(";");
  }

  void intruder() {
    if (!out_.ctx.intruder.empty()) ts_.fail("intruder already declared");
    std::string name = ts_.expect_ident("the intruder's name");
    out_.ctx.intruder = name;
    if (!out_.ctx.principals.count(name)) {
      declare(name, Atom::identity(name));
      out_.ctx.principals.insert(name);
    }
    ts_.expect_punct(";");
  }

  void keys() {
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      std::string name = ts_.expect_ident("a key name");
      ts_.expect_punct(":");
      std::string kind = ts_.expect_ident("pub or shared");
      if (kind == "pub") {
        ts_.expect_punct("(");
        std::string owner = expect_principal();
        ts_.expect_punct(")");
        Atom k = Atom::key(name, owner);
        declare(name, k);
        out_.ctx.keys.emplace(
            name, KeyInfo{k, SecurityLevel::bottom(),
                          SecurityLevel::finite({owner})});
      } else if (kind == "shared") {
        ts_.expect_punct("(");
        std::set<std::string> members;
        do {
          members.insert(expect_principal());
        } while (ts_.accept_punct(","));
        ts_.expect_punct(")");
        Atom k = Atom::key(name);
        declare(name, k);
        SecurityLevel l = SecurityLevel::finite(members);
        out_.ctx.keys.emplace(name, KeyInfo{k, l, l});
      } else {
        ts_.fail("expected pub or shared");
      }
      ts_.expect_punct(";");
    }
  }

  void fresh() {
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      std::string agent = expect_principal();
      ts_.expect_punct(":");
      do {
        std::string word = ts_.expect_ident("a fresh value");
        bool secret = false;
        if (word == "nonce" || word == "secret") {
          secret = word == "secret";
          word = ts_.expect_ident("a fresh value name");
        }
        Atom a = secret ? Atom::secret(word) : Atom::nonce(word);
        declare(word, a);
        out_.spec.fresh[agent].insert(a);
      } while (ts_.accept_punct(","));
      ts_.expect_punct(";");
    }
  }

  void levels() {
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      std::string name = ts_.expect_ident("an atom name");
      auto it = out_.symbols.find(name);
      if (it == out_.symbols.end())
        ts_.fail("unknown identifier '" + name + "'");
      if (it->second.sort == Sort::Key || it->second.sort == Sort::Identity)
        ts_.fail("levels assign fresh values only; keys and identities are "
                 "fixed by their declarations");
      ts_.expect_punct("=");
      out_.ctx.atom_levels[name] = level_value();
      ts_.expect_punct(";");
    }
  }

  SecurityLevel level_value() {
    if (ts_.accept_punct("{")) {
      std::set<std::string> members;
      if (!ts_.accept_punct("}")) {
        do {
          members.insert(expect_principal());
        } while (ts_.accept_punct(","));
        ts_.expect_punct("}");
      }
      return SecurityLevel::finite(std::move(members));
    }
    std::string word = ts_.expect_ident("bottom, top or a principal set");
    if (word == "bottom") return SecurityLevel::bottom();
    if (word == "top") return SecurityLevel::top();
    ts_.fail("expected bottom, top or '{'");
  }

  void knows() {
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      std::string agent = expect_principal();
      ts_.expect_punct(":");
      do {
        out_.ctx.knowledge[agent].insert(known_atom());
      } while (ts_.accept_punct(","));
      ts_.expect_punct(";");
    }
  }

  Atom known_atom() {
    std::string name = ts_.expect_ident("an atom or inv(key)");
    if (name == "inv") {
      ts_.expect_punct("(");
      std::string key = ts_.expect_ident("a key name");
      ts_.expect_punct(")");
      auto it = out_.symbols.find(key);
      if (it == out_.symbols.end() || it->second.sort != Sort::Key)
        ts_.fail("inv() needs a declared key");
      return inverse_key(out_.ctx, it->second);
    }
    auto it = out_.symbols.find(name);
    if (it == out_.symbols.end())
      ts_.fail("unknown identifier '" + name + "'");
    return it->second;
  }

  Message parse_term(std::map<std::string, Variable>& vars,
                     std::vector<Variable>* order) {
    TermParser tp(ts_, out_.symbols, out_.ctx, vars, order);
    return tp.term();
  }

  void protocol() {
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      ProtocolStep step;
      step.id = ts_.expect_number();
      ts_.expect_punct(".");
      step.sender = expect_principal();
      ts_.expect_punct("->");
      step.receiver = expect_principal();
      ts_.expect_punct(":");
      std::map<std::string, Variable> vars;
      step.message = parse_term(vars, nullptr);
      if (!vars.empty()) ts_.fail("protocol steps must be ground");
      ts_.expect_punct(";");
      out_.spec.steps.push_back(std::move(step));
    }
  }

  void roles() {
    ts_.expect_punct("{");
    std::vector<GeneralizedRole> all;
    while (!ts_.accept_punct("}")) {
      GeneralizedRole role;
      role.agent = expect_principal();
      std::map<std::string, Variable> vars;
      ts_.expect_punct("{");
      while (!ts_.accept_punct("}")) {
        RoleRule rule;
        std::string kw = ts_.expect_ident("recv");
        if (kw != "recv") ts_.fail("expected 'recv'");
        rule.received = parse_term(vars, &role.variables);
        kw = ts_.expect_ident("send");
        if (kw != "send") ts_.fail("expected 'send'");
        rule.sent = parse_term(vars, &role.variables);
        ts_.expect_punct(";");
        role.rules.push_back(std::move(rule));
      }
      all.push_back(std::move(role));
    }
    out_.roles = std::move(all);
  }

  TokenStream ts_;
  ParsedInput out_;
};

}  // namespace

ParsedInput parse_input(const std::string& text) {
  return InputParser(text).run();
}

Message parse_term_in(const ParsedInput& input, const std::string& term,
                      std::map<std::string, Variable>* vars,
                      std::vector<Variable>* order) {
  TokenStream ts(lex(term));
  std::map<std::string, Variable> local;
  TermParser tp(ts, input.symbols, input.ctx, vars ? *vars : local, order);
  Message m = tp.term();
  if (!ts.at_end()) ts.fail("trailing input after term");
  return m;
}

}  // namespace secan

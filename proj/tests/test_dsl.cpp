#include <fstream>
#include <sstream>

#include "doctest.h"
#include "secan/dsl.hpp"
#include "testutil.hpp"

using namespace secan;
using namespace testutil;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("the shipped protocol file parses to the reference fixture") {
  auto input = parse_input(slurp(protocol_path("keyserver.proto")));
  auto ref_ctx = keyserver_context();
  auto ref_spec = keyserver_spec();

  CHECK(input.ctx.principals == ref_ctx.principals);
  CHECK(input.ctx.intruder == "I");
  CHECK(input.ctx.keys.size() == 3);
  CHECK(input.ctx.keys.at("ka").key == key_a());
  CHECK(input.ctx.keys.at("ka").key_level.is_bottom());
  CHECK(input.ctx.keys.at("ka").inv_level == SecurityLevel::finite({"A"}));
  CHECK(input.ctx.atom_levels.at("Na") ==
        SecurityLevel::finite({"A", "B", "S"}));
  CHECK(input.ctx.atom_levels.at("sec") == SecurityLevel::finite({"A", "S"}));
  CHECK(input.ctx.knowledge == ref_ctx.knowledge);

  REQUIRE(input.spec.steps.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(input.spec.steps[i].id == ref_spec.steps[i].id);
    CHECK(input.spec.steps[i].sender == ref_spec.steps[i].sender);
    CHECK(input.spec.steps[i].receiver == ref_spec.steps[i].receiver);
    CHECK(input.spec.steps[i].message == ref_spec.steps[i].message);
  }
  CHECK(input.spec.fresh == ref_spec.fresh);
  CHECK_FALSE(input.roles.has_value());

  std::set<std::string> names;
  for (const auto& [n, a] : input.symbols) names.insert(n);
  CHECK(names == std::set<std::string>{"A", "B", "S", "I", "ka", "kb", "ks",
                                       "Na", "sec"});
}

TEST_CASE("the broken protocol file differs exactly where expected") {
  auto input = parse_input(slurp(protocol_path("keyserver_broken.proto")));
  auto ref = keyserver_spec(/*broken=*/true);
  REQUIRE(input.spec.steps.size() == 3);
  CHECK(input.spec.steps[1].message == ref.steps[1].message);
  Atom kb_inv = key_b();
  kb_inv.is_inverse = true;
  CHECK(input.ctx.knowledge.at("I").count(kb_inv) == 1);
}

TEST_CASE("shared keys get a symmetric level") {
  auto input = parse_input(
      "principals A, B;\n"
      "intruder I;\n"
      "keys { kab: shared(A, B); }\n"
      "fresh { A: n; }\n"
      "levels { n = {A, B}; }\n"
      "knows { A: kab; B: kab; I: I; }\n"
      "protocol { 1. A -> B : enc(n, kab); }\n");
  const auto& info = input.ctx.keys.at("kab");
  CHECK(info.key_level == SecurityLevel::finite({"A", "B"}));
  CHECK(info.inv_level == SecurityLevel::finite({"A", "B"}));
  CHECK_FALSE(info.key.owner.has_value());
}

TEST_CASE("parse errors carry a position") {
  auto expect_error = [](const std::string& text, const std::string& needle,
                         unsigned line = 0) {
    try {
      parse_input(text);
      FAIL_CHECK("expected a parse error for: " << text);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      if (line) CHECK(e.line() == line);
    }
  };

  expect_error("principals A, B;\n", "missing intruder", 2);
  expect_error("principals A, A;\n", "already declared", 1);
  expect_error("principals A;\nintruder I;\n", "needs a protocol");
  expect_error("principals A;\nintruder I;\n"
               "protocol { 1. A -> A : X; }\n",
               "unknown identifier 'X'", 3);
  expect_error("principals A;\nintruder I;\n"
               "protocol { 1. A -> A : ?X; }\n",
               "must be ground", 3);
  expect_error("principals A;\nintruder I;\nfresh { A: Na; }\n"
               "protocol { 1. A -> A : A^i; }\n",
               "session index on non-nonce A", 4);
  expect_error("principals A;\nintruder I;\n"
               "knows { A: inv(A); }\n"
               "protocol { 1. A -> A : A; }\n",
               "inv() needs a declared key", 3);
  expect_error("principals A;\nintruder I;\nlevels { A = {A}; }\n",
               "fixed by their declarations", 3);
  expect_error("keys { k: pub(A); }\n", "is not a principal", 1);
  expect_error("principals A;\nintruder I;\n@", "unexpected character '@'", 3);
  expect_error("principals A;\nintruder I;\nbogus;\n", "unknown section", 3);
}

TEST_CASE("an explicit roles section overrides extraction") {
  auto input = parse_input(
      "principals A, B;\n"
      "intruder I;\n"
      "keys { ka: pub(A); kb: pub(B); }\n"
      "fresh { A: secret s; }\n"
      "levels { s = {A, B}; }\n"
      "knows { A: ka, kb, inv(ka); B: ka, kb, inv(kb); I: ka, kb, I; }\n"
      "roles {\n"
      "  A { recv epsilon send enc(s, kb); }\n"
      "  B { recv enc(?X:secret, kb) send enc(?X, ka); }\n"
      "}\n");
  REQUIRE(input.roles.has_value());
  REQUIRE(input.roles->size() == 2);
  const auto& a = (*input.roles)[0];
  const auto& b = (*input.roles)[1];
  CHECK(a.agent == "A");
  CHECK(a.rules.size() == 1);
  CHECK(a.rules[0].received.is_epsilon());
  CHECK(a.rules[0].sent.display() == "{s}_kb");
  CHECK(a.variables.empty());
  REQUIRE(b.variables.size() == 1);
  CHECK(b.variables[0].name == "X");
  CHECK(b.variables[0].sort == Sort::Secret);
  CHECK(b.rules[0].sent == Message::enc(Message::var(b.variables[0]),
                                        m(key_a())));
  CHECK(input.spec.steps.empty());
}

TEST_CASE("explicit roles are validated") {
  CHECK_THROWS_AS(parse_input("principals A;\n"
                              "intruder I;\n"
                              "keys { ka: pub(A); }\n"
                              "knows { A: ka, inv(ka); I: I; }\n"
                              "roles { A { recv epsilon send ?X; } }\n"),
                  MalformedSpec);
}

TEST_CASE("terms parse in the vocabulary of an input") {
  auto input = parse_input(slurp(protocol_path("keyserver.proto")));

  CHECK(parse_term_in(input, "epsilon").is_epsilon());
  CHECK(parse_term_in(input, "A . Na . S") ==
        Message::concat({m(id_a()), m(nonce_na()), m(id_s())}));
  CHECK(parse_term_in(input, "enc(sec, inv(ka))") ==
        Message::enc(m(secret_sec()),
                     m(inverse_key(input.ctx, key_a()))));
  CHECK(parse_term_in(input, "Na^2") ==
        m(nonce_na().with_session(2)));
  CHECK(parse_term_in(input, "Na^i").display() == "Na^i");

  SUBCASE("variables share a table across calls") {
    std::map<std::string, Variable> vars;
    Message first = parse_term_in(input, "?X:nonce . A", &vars);
    Message second = parse_term_in(input, "enc(?X, kb)", &vars);
    REQUIRE(vars.count("X") == 1);
    CHECK(second == Message::enc(Message::var(vars.at("X")), m(key_b())));
    CHECK(vars.at("X").sort == Sort::Nonce);
    CHECK_THROWS_AS(parse_term_in(input, "?X:secret", &vars), ParseError);
  }

  SUBCASE("order records first mentions") {
    std::map<std::string, Variable> vars;
    std::vector<Variable> order;
    parse_term_in(input, "?P:nonce . ?Q . ?P", &vars, &order);
    REQUIRE(order.size() == 2);
    CHECK(order[0].name == "P");
    CHECK(order[1].name == "Q");
    CHECK(order[1].sort == Sort::Any);
  }

  CHECK_THROWS_AS(parse_term_in(input, "A B"), ParseError);
  CHECK_THROWS_AS(parse_term_in(input, "enc(A, Na)"), ParseError);
}

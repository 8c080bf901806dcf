#include "doctest.h"
#include "secan/protocol.hpp"
#include "secan/witness.hpp"
#include "testutil.hpp"

using namespace secan;
using namespace testutil;

namespace {

SecurityLevel fin(std::set<std::string> known) {
  return SecurityLevel::finite(std::move(known));
}

Message var_y() { return Message::var({"Y", Sort::Nonce, {}, {}}); }
Message var_z() { return Message::var({"Z", Sort::Any, {}, {}}); }
Message var_t() { return Message::var({"T", Sort::Nonce, {}, {}}); }

Message b_receive() {
  return Message::concat(
      {Message::enc(Message::concat({m(id_b()), m(id_a()), m(id_s()),
                                     var_y()}),
                    m(key_b())),
       Message::enc(Message::concat({m(id_a()), m(id_b()), m(id_s()),
                                     var_z()}),
                    m(key_b()))});
}

Message b_send() {
  return Message::enc(Message::concat({m(id_b()), var_z(), m(id_a()),
                                       var_y(), m(id_s())}),
                      m(key_a()));
}

// Two-principal context for protective-layer corner cases: kw's inverse is
// wide open, so kw never protects anything above Bottom.
VerificationContext corner_context() {
  VerificationContext ctx;
  ctx.principals = {"A", "B", "I"};
  ctx.intruder = "I";
  ctx.keys.emplace("ka", KeyInfo{Atom::key("ka", "A"),
                                 SecurityLevel::bottom(),
                                 SecurityLevel::finite({"A"})});
  ctx.keys.emplace("kw", KeyInfo{Atom::key("kw"), SecurityLevel::bottom(),
                                 SecurityLevel::bottom()});
  ctx.atom_levels["n"] = SecurityLevel::finite({"A", "B"});
  return ctx;
}

}  // namespace

TEST_CASE("f_max_ik basics") {
  auto ctx = keyserver_context();

  SUBCASE("no occurrence is top, unprotected is bottom") {
    CHECK(f_max_ik(m(nonce_na()), m(id_a()), ctx).is_top());
    CHECK(f_max_ik(m(nonce_na()), m(nonce_na()), ctx).is_bottom());
  }

  SUBCASE("protective innermost layer") {
    Message t = Message::enc(
        Message::concat({m(id_a()), m(nonce_na()), m(id_s()), m(id_b())}),
        m(key_s()));
    // inv(ks) level {S} dominates {A,B,S}; neighbors A, S, B join in.
    CHECK(f_max_ik(m(nonce_na()), t, ctx) == fin({"A", "B", "S"}));
  }

  SUBCASE("the sealed secret") {
    Message reply2 = Message::enc(
        Message::concat({m(id_a()), m(id_b()), m(id_s()),
                         Message::enc(Message::concat({m(id_s()),
                                                       m(secret_sec())}),
                                      m(key_a()))}),
        m(key_b()));
    // Inner ka protects sec ({A} dominates {A,S}); only S shares the scope.
    CHECK(f_max_ik(m(secret_sec()), reply2, ctx) == fin({"A", "S"}));
  }

  SUBCASE("variable subjects always find the innermost layer protective") {
    Message t = Message::enc(Message::concat({m(id_b()), var_z(), m(id_a()),
                                              m(id_s())}),
                             m(key_a()));
    CHECK(f_max_ik(var_z(), t, ctx) == fin({"A", "B", "S"}));
  }

  SUBCASE("occurrences meet") {
    Message t = Message::concat(
        {Message::enc(Message::concat({m(secret_sec()), m(id_a())}),
                      m(key_a())),
         Message::enc(Message::concat({m(secret_sec()), m(id_b())}),
                      m(key_s()))});
    // First occurrence: {A} with neighbor A. Second: {S} with neighbor B.
    CHECK(f_max_ik(m(secret_sec()), t, ctx) == fin({"A", "B", "S"}));
  }
}

TEST_CASE("f_max_ik skips non-protective layers") {
  auto ctx = corner_context();
  Message n = m(Atom::nonce("n"));

  // kw's inverse is Bottom: never protective for n whose level is {A,B}.
  Message weak = Message::enc(Message::concat({n, m(id_a())}),
                              m(Atom::key("kw")));
  CHECK(f_max_ik(n, weak, ctx).is_bottom());

  // A protective ka layer above the weak one takes over; identity
  // neighbors under the whole protective scope count, B included.
  Message strong = Message::enc(Message::concat({weak, m(id_b())}),
                                m(Atom::key("ka", "A")));
  CHECK(f_max_ik(n, strong, ctx) == fin({"A", "B"}));

  // The same layer is protective for a Bottom-level subject.
  CHECK(f_max_ik(m(id_a()), weak, ctx).is_bottom());
  Message wrapped_id = Message::enc(m(id_b()), m(Atom::key("kw")));
  CHECK(f_max_ik(m(id_b()), wrapped_id, ctx).is_bottom());
}

TEST_CASE("f_prime") {
  auto ctx = keyserver_context();

  SUBCASE("epsilon and absence give top") {
    CHECK(f_prime(m(nonce_na().with_session({})), Message::epsilon(), ctx)
              .is_top());
    CHECK(f_prime(m(secret_sec()),
                  Message::enc(Message::concat({m(id_a()), var_t(),
                                                m(id_s()), m(id_b())}),
                               m(key_s())),
                  ctx)
              .is_top());
  }

  SUBCASE("atoms surviving derivation are measured directly") {
    Message t = Message::enc(
        Message::concat({m(id_a()), m(nonce_na()), var_z()}), m(key_s()));
    // derive(t) = {A.Na}_ks; Na still present.
    CHECK(f_prime(m(nonce_na()), t, ctx) == fin({"A", "S"}));
  }

  SUBCASE("variable subjects keep their slot") {
    CHECK(f_prime(var_z(), b_receive(), ctx) == fin({"A", "B", "S"}));
    CHECK(f_prime(var_y(), b_receive(), ctx) == fin({"A", "B", "S"}));
    CHECK(f_prime(var_t(),
                  Message::enc(Message::concat({m(id_a()), var_t(),
                                                m(id_s()), m(id_b())}),
                               m(key_s())),
                  ctx) == fin({"A", "B", "S"}));
  }

  SUBCASE("an absent atom meets over compatible variable slots") {
    // sec is not in b_receive, but could instantiate Z (any) there.
    CHECK(f_prime(m(secret_sec()), b_receive(), ctx) == fin({"A", "B", "S"}));
    // A nonce could instantiate Y or Z; both slots give the same level.
    CHECK(f_prime(m(nonce_na().with_session(1)), b_receive(), ctx) ==
          fin({"A", "B", "S"}));
  }
}

TEST_CASE("motivating example for the derivative function") {
  VerificationContext ctx;
  ctx.principals = {"A", "B", "C", "D", "I"};
  ctx.intruder = "I";
  ctx.keys.emplace("kcd", KeyInfo{Atom::key("kcd"),
                                  SecurityLevel::finite({"C", "D"}),
                                  SecurityLevel::finite({"C", "D"})});
  ctx.atom_levels["alpha"] = SecurityLevel::finite({"C", "D"});
  Message alpha = m(Atom::secret("alpha"));
  Message kcd = m(Atom::key("kcd"));

  Message first = Message::enc(
      Message::concat({alpha, m(id_a()), Message::var({"X", Sort::Any, {}, {}})}),
      kcd);
  CHECK(f_prime(alpha, first, ctx) == fin({"A", "C", "D"}));

  Message second = Message::enc(
      Message::concat({alpha, Message::var({"Y", Sort::Any, {}, {}}), m(id_b())}),
      kcd);
  CHECK(f_prime(alpha, second, ctx) == fin({"B", "C", "D"}));
}

TEST_CASE("lower_bound_upsilon") {
  auto ctx = keyserver_context();
  auto roles = extract_generalized_roles(keyserver_spec(), ctx);
  auto patterns = encryption_patterns(roles);

  SUBCASE("ground components are measured directly") {
    Message sent = roles[0].rules[0].sent;  // {A.Na^i.S.B}_ks
    auto r = lower_bound_upsilon(m(nonce_na().with_session({})), sent,
                                 patterns, ctx);
    CHECK(r.level == fin({"A", "B", "S"}));
    CHECK_FALSE(r.no_source);
    REQUIRE(r.contributions.size() == 1);
    CHECK_FALSE(r.contributions[0].pattern_index);
  }

  SUBCASE("pattern sources contribute through the static neighborhood") {
    auto r = lower_bound_upsilon(var_z(), b_send(), patterns, ctx);
    CHECK(r.level == fin({"A", "B", "S"}));
    REQUIRE(r.contributions.size() == 1);
    CHECK(r.contributions[0].pattern_index == 5);

    auto y = lower_bound_upsilon(var_y(), b_send(), patterns, ctx);
    CHECK(y.level == fin({"A", "B", "S"}));
  }

  SUBCASE("multiple sources meet") {
    Message sent = roles[2].rules[0].sent;
    auto r = lower_bound_upsilon(var_t(), sent, patterns, ctx);
    CHECK(r.level == fin({"A", "B", "S"}));
    std::set<unsigned> indices;
    for (const auto& c : r.contributions)
      if (c.pattern_index) indices.insert(*c.pattern_index);
    CHECK(indices == std::set<unsigned>{3, 7});
  }

  SUBCASE("components without the subject contribute top") {
    Message sent = roles[2].rules[0].sent;
    auto r = lower_bound_upsilon(m(secret_sec()), sent, patterns, ctx);
    CHECK(r.level == fin({"A", "S"}));
    bool saw_absent = false;
    for (const auto& c : r.contributions)
      if (c.level.is_top()) saw_absent = true;
    CHECK(saw_absent);
  }

  SUBCASE("a sourceless component is flagged and priced bottom") {
    Message rogue = Message::enc(Message::concat({var_z(), m(id_a())}),
                                 m(key_s()));
    auto r = lower_bound_upsilon(var_z(), rogue, patterns, ctx);
    CHECK(r.no_source);
    CHECK(r.level.is_bottom());
    CHECK_FALSE(r.diagnostic.empty());
  }
}

TEST_CASE("upsilon is substitution-independent on the pattern slots") {
  auto ctx = keyserver_context();
  auto roles = extract_generalized_roles(keyserver_spec(), ctx);
  auto patterns = encryption_patterns(roles);

  // Instantiating Y with a concrete session nonce must not change Z's bound.
  auto ground_y = Substitution::make(
      {{Variable{"Y", Sort::Nonce, {}, {}}, m(nonce_na().with_session(4))}});
  auto r1 = lower_bound_upsilon(var_z(), b_send(), patterns, ctx);
  auto r2 = lower_bound_upsilon(var_z(), ground_y.apply(b_send()), patterns,
                                ctx);
  CHECK(r1.level == r2.level);
}

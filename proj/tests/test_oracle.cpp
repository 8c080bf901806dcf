#include <algorithm>
#include <set>

#include "doctest.h"
#include "secan/interpretation.hpp"
#include "secan/oracle.hpp"
#include "secan/witness.hpp"
#include "testutil.hpp"

using namespace secan;
using namespace testutil;

TEST_CASE("default atom pool covers principals, key halves and fresh atoms") {
  auto ctx = keyserver_context();
  auto pool = default_atom_pool(ctx, keyserver_spec());
  std::set<std::string> names;
  for (const Atom& a : pool) names.insert(a.display());
  std::set<std::string> expected = {"A",  "B",  "S",  "I",
                                    "ka", "kb", "ks", "ka^-1",
                                    "kb^-1", "ks^-1", "Na", "sec"};
  CHECK(names == expected);
}

TEST_CASE("probe finds no counterexample for the shipped metrics") {
  auto ctx = keyserver_context();
  auto pool = default_atom_pool(ctx, keyserver_spec());

  SUBCASE("witness base") {
    MetricFn fmax = [&](const Message& s, const Message& m) {
      return f_max_ik(s, m, ctx);
    };
    auto report = probe_full_invariance(fmax, ctx, pool);
    CHECK(report.trials == 1000);
    CHECK(report.violation_count == 0);
  }
  SUBCASE("dek") {
    MetricFn fn = [&](const Message& s, const Message& m) {
      return dek(s, m, ctx);
    };
    ProbeOptions opts;
    opts.trials = 400;
    auto report = probe_full_invariance(fn, ctx, pool, opts);
    CHECK(report.violation_count == 0);
  }
  SUBCASE("dekan") {
    MetricFn fn = [&](const Message& s, const Message& m) {
      return dekan(s, m, ctx);
    };
    ProbeOptions opts;
    opts.trials = 400;
    auto report = probe_full_invariance(fn, ctx, pool, opts);
    CHECK(report.violation_count == 0);
  }
}

TEST_CASE("probe rejects a metric that never prices anything Bottom") {
  auto ctx = keyserver_context();
  auto pool = default_atom_pool(ctx, keyserver_spec());
  MetricFn always_top = [](const Message&, const Message&) {
    return SecurityLevel::top();
  };
  ProbeOptions opts;
  opts.trials = 100;
  auto report = probe_full_invariance(always_top, ctx, pool, opts);
  CHECK(report.violation_count > 0);
  REQUIRE_FALSE(report.violations.empty());
  for (const auto& v : report.violations) {
    CHECK(v.clause == "anchor");
    CHECK_FALSE(v.level_on_knowledge.is_bottom());
  }
}

TEST_CASE("probe rejects a metric that drops under pairing") {
  auto ctx = keyserver_context();
  auto pool = default_atom_pool(ctx, keyserver_spec());
  MetricFn drops = [](const Message&, const Message& m) {
    return m.is_concat() ? SecurityLevel::bottom()
                         : SecurityLevel::finite({"A"});
  };
  ProbeOptions opts;
  opts.trials = 200;
  auto report = probe_full_invariance(drops, ctx, pool, opts);
  CHECK(report.violation_count > 0);
  bool saw_invariance =
      std::any_of(report.violations.begin(), report.violations.end(),
                  [](const ProbeViolation& v) {
                    return v.clause == "invariance" &&
                           v.level_on_derived.is_bottom();
                  });
  CHECK(saw_invariance);
}

TEST_CASE("probe requires a payload atom") {
  auto ctx = keyserver_context();
  MetricFn any = [](const Message&, const Message&) {
    return SecurityLevel::top();
  };
  CHECK_THROWS_AS(probe_full_invariance(any, ctx, {}), Error);
}

TEST_CASE("attack search exhausts the sound protocol") {
  auto ctx = keyserver_context();
  auto roles = extract_generalized_roles(keyserver_spec(), ctx);
  CHECK_FALSE(bounded_attack_search(roles, ctx, secret_sec(), 1));
  CHECK_FALSE(bounded_attack_search(roles, ctx, secret_sec(), 2));
}

TEST_CASE("attack search finds the leak in the broken variant") {
  auto ctx = keyserver_context(/*intruder_has_kb_inv=*/true);
  auto roles = extract_generalized_roles(keyserver_spec(/*broken=*/true), ctx);
  auto trace = bounded_attack_search(roles, ctx, secret_sec(), 1);
  REQUIRE(trace);
  CHECK(trace->leaked == secret_sec());
  REQUIRE(trace->steps.size() == 2);
  CHECK(trace->steps[0].agent == "A");
  CHECK(trace->steps[0].received.is_epsilon());
  CHECK(trace->steps[1].agent == "S");
  CHECK(trace->steps[1].received.display() == "{A.Na^1.S.B}_ks");

  // Replay the trace against an independent closure: every received
  // instance must be derivable at the point it is consumed, and the leak
  // must hold at the end.
  DeductionClosure closure(ctx, {});
  for (const Atom& a : ctx.knowledge.at("I")) closure.add(Message::atom(a));
  for (const auto& step : trace->steps) {
    if (!step.received.is_epsilon()) CHECK(closure.derives(step.received));
    if (!step.sent.is_epsilon()) closure.add(step.sent);
  }
  CHECK(closure.derives(m(secret_sec())));
}

TEST_CASE("zero sessions never yield an attack") {
  auto ctx = keyserver_context(true);
  auto roles = extract_generalized_roles(keyserver_spec(true), ctx);
  CHECK_FALSE(bounded_attack_search(roles, ctx, secret_sec(), 0));
}

TEST_CASE("a secret already known to the intruder needs no steps") {
  auto ctx = keyserver_context();
  ctx.knowledge["I"].insert(secret_sec());
  auto roles = extract_generalized_roles(keyserver_spec(), ctx);
  auto trace = bounded_attack_search(roles, ctx, secret_sec(), 1);
  REQUIRE(trace);
  CHECK(trace->steps.empty());
  CHECK(trace->leaked == secret_sec());
}

TEST_CASE("node cap aborts the search") {
  auto ctx = keyserver_context();
  auto roles = extract_generalized_roles(keyserver_spec(), ctx);
  CHECK_THROWS_AS(bounded_attack_search(roles, ctx, secret_sec(), 2, 1),
                  SearchBudgetExceeded);
}

TEST_CASE("a role sending an unbound variable is rejected") {
  auto ctx = keyserver_context();
  GeneralizedRole r;
  r.agent = "A";
  Variable x;
  x.name = "X";
  x.sort = Sort::Nonce;
  r.rules = {{Message::epsilon(), Message::var(x), {}, {}}};
  r.variables = {x};
  CHECK_THROWS_AS(bounded_attack_search({r}, ctx, secret_sec(), 1),
                  MalformedSpec);
}

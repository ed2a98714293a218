#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "generators.hpp"
#include "support.hpp"
#include "ueq/errors.hpp"
#include "ueq/spnf.hpp"
#include "ueq/translator.hpp"

using namespace ueq;
using namespace ueq::test;

TEST_CASE("index query normalizes to one term") {
   auto p = load("schema rs(k:int, a:int); table R(rs); key R(k); index I on R(k, a);");
   FreshScope scope;
   auto q = prepare_query(parse_query("SELECT t2.* FROM I t1, R t2 WHERE t1.k = t2.k AND t1.a >= 12"), p.env);
   auto d = denote(*q, p.env);
   Session s;
   Spnf n = to_spnf(d.body, &s);
   REQUIRE(n.terms.size() == 1);
   CHECK(n.terms[0].atoms.size() == 2);
   CHECK(n.terms[0].sum_vars.size() >= 2);
   CHECK(check_spnf(n, {d.output.id}));
   CHECK(s.trace.count_rule("pull-sum-l") + s.trace.count_rule("pull-sum-r") > 0);
}

TEST_CASE("distribution over a union") {
   FreshScope scope;
   UexpGen g;
   auto t = g.free()[0];
   Expr e = mul(pred(eq_atom(attr(t, 0), attr(t, 1))), add(rel("R", t), rel("S", t)));
   Session s;
   Spnf n = to_spnf(e, &s);
   CHECK(n.terms.size() == 2);
   CHECK(s.trace.count_rule("distr-prod-plus-l") == 1);
   CHECK(s.trace.lines().size() == 1);
}

TEST_CASE("squash and negation slots") {
   FreshScope scope;
   UexpGen g;
   auto t = g.free()[0];
   Expr e = mul(squash(rel("R", t)), mul(squash(rel("S", t)), mul(neg(rel("R", t)), neg(rel("S", t)))));
   Session s;
   Spnf n = to_spnf(e, &s);
   REQUIRE(n.terms.size() == 1);
   REQUIRE(n.terms[0].squash);
   REQUIRE(n.terms[0].negation);
   CHECK(n.terms[0].negation->terms.size() == 2);
   CHECK(s.trace.count_rule("pull-merely") >= 1);
   CHECK(s.trace.count_rule("pull-not") >= 1);

   CHECK(to_spnf(squash(zero())).terms.empty());
   Spnf unit = to_spnf(squash(add(one(), rel("R", t))));
   REQUIRE(unit.terms.size() == 1);
   CHECK(unit.terms[0].is_unit());
   Spnf nz = to_spnf(neg(zero()));
   REQUIRE(nz.terms.size() == 1);
   CHECK(nz.terms[0].is_unit());
}

TEST_CASE("shadowed binders are freshened") {
   FreshScope scope;
   UexpGen g;
   auto s = g.schema();
   auto t = fresh_var(s);
   Expr inner = sum(t, rel("R", t));
   Expr e = sum(t, mul(rel("S", t), inner));
   Spnf n = to_spnf(e);
   REQUIRE(n.terms.size() == 1);
   REQUIRE(n.terms[0].sum_vars.size() == 2);
   CHECK(n.terms[0].sum_vars[0] != n.terms[0].sum_vars[1]);
   CHECK(check_spnf(n));
}

TEST_CASE("term product avoids capture") {
   FreshScope scope;
   UexpGen g;
   auto s = g.schema();
   auto t = fresh_var(s), o = g.free()[0];
   Spnf a = to_spnf(sum(t, mul(rel("R", t), pred(eq_atom(attr(t, 0), attr(o, 0))))));
   Spnf b = to_spnf(sum(t, mul(rel("S", t), pred(eq_atom(attr(t, 1), attr(o, 1))))));
   Spnf p = spnf_product(a, b);
   REQUIRE(p.terms.size() == 1);
   CHECK(p.terms[0].sum_vars.size() == 2);
   CHECK(check_spnf(p, {o.id}));

   VarSubst sub;
   sub.rename[o.id] = p.terms[0].sum_vars[0];
   Term moved = substitute(p.terms[0], sub);
   CHECK(free_vars(moved) == std::set<int>{p.terms[0].sum_vars[0].id});
}

TEST_CASE("node limit") {
   FreshScope scope;
   UexpGen g;
   auto t = g.free()[0];
   Expr e = one();
   for (int i = 0; i < 24; ++i) e = mul(e, add(rel("R", t), rel("S", t)));
   Session s;
   s.node_limit = 10000;
   CHECK_THROWS_AS(to_spnf(e, &s), ResourceExhausted);
}

TEST_CASE("normalization preserves values and is idempotent") {
   UexpGen g;
   auto dbs = g.databases(5, 10);
   for (int i = 0; i < 60; ++i) {
      Rng rng(static_cast<std::uint64_t>(i));
      Expr e = g.expr(rng, 3);
      Spnf n = to_spnf(e);
      Expr back = to_uexp(n);
      CHECK(check_spnf(n, free_vars(e)));
      CHECK(is_spnf(back));
      CHECK(alpha_equal(to_uexp(to_spnf(back)), back));
      for (const auto& db : dbs) {
         Binding b = g.binding(rng, db, e);
         Binding b2 = b;
         REQUIRE_MESSAGE(eval_uexp(e, db, b) == eval_uexp(back, db, b2), to_string(e));
      }
   }
}

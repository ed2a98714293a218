#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ueq/axioms.hpp"
#include "ueq/errors.hpp"
#include "ueq/uexp.hpp"

using namespace ueq;

namespace {

SchemaPtr two_ints() {
   auto s = std::make_shared<Schema>();
   s->name = "rs";
   s->columns = {{"k", BaseType::Int, {}}, {"a", BaseType::Int, {}}};
   return s;
}

} // namespace

TEST_CASE("fresh variables restart inside a scope") {
   auto s = two_ints();
   int first;
   {
      FreshScope scope;
      first = fresh_var(s).id;
      CHECK(fresh_var(s).id == first + 1);
   }
   FreshScope scope;
   CHECK(fresh_var(s).id == first);
}

TEST_CASE("free variables and substitution") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s), u = fresh_var(s), w = fresh_var(s);
   Expr e = sum(t, mul(rel("R", t), pred(eq_atom(attr(t, 0), attr(u, 1)))));
   CHECK(free_vars(e) == std::set<int>{u.id});

   VarSubst sub;
   sub.rename[u.id] = w;
   Expr r = substitute(e, sub);
   CHECK(free_vars(r) == std::set<int>{w.id});

   VarSubst capture;
   capture.rename[u.id] = t;
   Expr c = substitute(e, capture);
   CHECK(free_vars(c) == std::set<int>{t.id});
   CHECK(c->var != t);

   Expr cols = substitute_columns(pred(eq_atom(attr(u, 0), attr(u, 1))), u, {constant("1", BaseType::Int), attr(w, 0)});
   CHECK(to_string(cols) == to_string(pred(eq_atom(constant("1", BaseType::Int), attr(w, 0)))));
   CHECK_THROWS_AS(substitute_columns(rel("R", u), u, {attr(w, 0), attr(w, 1)}), SemanticError);
}

TEST_CASE("alpha equality") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s), u = fresh_var(s), o = fresh_var(s);
   Expr a = sum(t, mul(rel("R", t), pred(eq_atom(attr(t, 0), attr(o, 0)))));
   Expr b = sum(u, mul(rel("R", u), pred(eq_atom(attr(u, 0), attr(o, 0)))));
   Expr c = sum(u, mul(rel("S", u), pred(eq_atom(attr(u, 0), attr(o, 0)))));
   CHECK(alpha_equal(a, b));
   CHECK_FALSE(alpha_equal(a, c));
   CHECK_FALSE(alpha_equal(a, rename(b, o, t)));
   CHECK(to_string(a) == to_string(b));
}

TEST_CASE("axiom names round trip") {
   for (Axiom a : all_axioms()) {
      auto back = axiom_from_name(axiom_name(a));
      REQUIRE(back);
      CHECK(*back == a);
   }
   CHECK(axiom_name(Axiom::MulComm) == "prod-comm");
   CHECK(axiom_name(Axiom::DistrL) == "distr-prod-plus-l");
   CHECK(axiom_name(Axiom::SumSubstEq) == "sum-subst-eq");
   CHECK_FALSE(axiom_from_name("no-such-rule"));
}

TEST_CASE("axiom application at paths") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s);
   Expr x = rel("R", t), y = rel("S", t), z = rel("T", t);
   CHECK(to_string(apply_axiom(mul(x, add(y, z)), Axiom::DistrL)) == to_string(add(mul(x, y), mul(x, z))));
   CHECK(to_string(apply_axiom(squash(add(one(), x)), Axiom::SquashOnePlus)) == to_string(one()));
   Expr nested = add(z, mul(x, one()));
   CHECK(to_string(apply_axiom(nested, Axiom::MulOne, {1})) == to_string(add(z, x)));
   CHECK_THROWS_AS(apply_axiom(nested, Axiom::MulOne), AxiomMismatch);
   CHECK_THROWS_AS(apply_axiom(nested, Axiom::MulOne, {3}), AxiomMismatch);
   CHECK(path_string({0, 1}) == "/0/1");
   CHECK(path_string({}) == "/");
}

TEST_CASE("summation axioms") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s), o = fresh_var(s);
   Expr body = mul(pred(eq_atom(attr(t, 0), attr(o, 0))), mul(pred(eq_atom(attr(t, 1), attr(o, 1))), rel("R", t)));
   CHECK(alpha_equal(apply_axiom(sum(t, body), Axiom::SumSubstEq), rel("R", o)));

   Expr only = sum(t, mul(pred(eq_atom(attr(t, 0), attr(o, 0))), pred(eq_atom(attr(t, 1), attr(o, 1)))));
   CHECK(alpha_equal(apply_axiom(only, Axiom::SumEqOne), one()));

   Expr partial = sum(t, mul(pred(eq_atom(attr(t, 0), attr(o, 0))), rel("R", t)));
   CHECK_THROWS_AS(apply_axiom(partial, Axiom::SumSubstEq), AxiomMismatch);

   Expr pulled = apply_axiom(mul(rel("S", t), sum(t, rel("R", t))), Axiom::PullSumL);
   REQUIRE(pulled->kind == ExprNode::Kind::Sum);
   CHECK(pulled->var != t);
   CHECK(free_vars(pulled) == std::set<int>{t.id});
}

TEST_CASE("squash idempotence needs a proof") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s);
   Expr x = squash(rel("R", t));
   AxiomArgs args;
   args.proof = {{Axiom::SquashSquare, {}}};
   CHECK(alpha_equal(apply_axiom(squash(x), Axiom::SquashIdempotent, {}, args), x));
   CHECK_THROWS_AS(apply_axiom(squash(x), Axiom::SquashIdempotent), AxiomMismatch);
}

TEST_CASE("excluded middle and equality substitution") {
   FreshScope scope;
   auto s = two_ints();
   auto t = fresh_var(s);
   AxiomArgs args;
   args.e1 = attr(t, 0);
   args.e2 = constant("3", BaseType::Int);
   Expr em = apply_axiom(one(), Axiom::ExcludedMiddle, {}, args);
   CHECK(em->kind == ExprNode::Kind::Add);
   CHECK(em->b->kind == ExprNode::Kind::Not);

   Expr f = mul(pred(cmp_atom(">", attr(t, 0), attr(t, 1))), pred(eq_atom(attr(t, 0), constant("3", BaseType::Int))));
   Expr g = apply_axiom(f, Axiom::EqSubst);
   CHECK(to_string(g->a) == to_string(pred(cmp_atom(">", constant("3", BaseType::Int), attr(t, 1)))));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "ueq/errors.hpp"

using namespace ueq;
using namespace ueq::test;

namespace {

const char* kRs = R"(
schema rs(k:int, a:int);
table R(rs);
key R(k);
index I on R(k, a);
)";

bool has_groupby(const QueryAst& q) {
   if (!q.group_by.empty()) return true;
   for (const auto& f : q.from)
      if (has_groupby(*f.source)) return true;
   for (const auto& p : q.projections)
      if (p.expr && p.expr->sub && has_groupby(*p.expr->sub)) return true;
   if (q.left && has_groupby(*q.left)) return true;
   if (q.right && has_groupby(*q.right)) return true;
   return false;
}

bool mentions_table(const QueryAst& q, const std::string& name) {
   if (q.kind == QueryAst::Kind::Table) return q.table == name;
   for (const auto& f : q.from)
      if (mentions_table(*f.source, name)) return true;
   if (q.left && mentions_table(*q.left, name)) return true;
   if (q.right && mentions_table(*q.right, name)) return true;
   return false;
}

} // namespace

TEST_CASE("parse selection with comparison") {
   auto q = parse_query("SELECT * FROM R t WHERE t.a >= 12");
   REQUIRE(q->kind == QueryAst::Kind::Select);
   REQUIRE(q->projections.size() == 1);
   CHECK(q->projections[0].kind == Projection::Kind::Star);
   REQUIRE(q->from.size() == 1);
   CHECK(q->from[0].alias == "t");
   CHECK(q->from[0].source->table == "R");
   REQUIRE(q->where);
   CHECK(q->where->kind == PredAst::Kind::Cmp);
   CHECK(q->where->op == ">=");
   CHECK(q->where->rhs->literal == "12");
}

TEST_CASE("generic schema declaration") {
   auto p = parse_program("schema s(a:int, ?" "?);");
   REQUIRE(p.statements.size() == 1);
   const auto& s = std::get<SchemaStmt>(p.statements[0]);
   CHECK(s.name == "s");
   auto env = analyze(p).env;
   REQUIRE(env.schemas.count("s"));
   CHECK(env.schemas.at("s")->generic());
   CHECK(env.schemas.at("s")->find_all("a").size() == 1);
}

TEST_CASE("empty program") {
   CHECK(parse_program("").statements.empty());
   CHECK(parse_program("  -- only a comment\n").statements.empty());
}

TEST_CASE("syntax errors carry positions") {
   try {
      parse_program("table R(a:int);\nverify x: SELECT FROM R r == R;");
      FAIL("expected a parse error");
   } catch (const ParseError& e) {
      CHECK(e.pos().line == 2);
   }
   CHECK_THROWS_AS(parse_program("table R(a:int)"), ParseError);
}

TEST_CASE("semantic errors") {
   CHECK_THROWS_AS(load("table R(s);"), SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); key R(b);"), SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); verify v: SELECT x.b AS b FROM R x == SELECT x.a AS b FROM R x;"),
                   SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); verify v: SELECT y.a AS a FROM R x == SELECT x.a AS a FROM R x;"),
                   SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); verify v: SELECT * FROM S x == SELECT * FROM R x;"), SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); verify v: SELECT x.a AS a FROM R x, R x == SELECT x.a AS a FROM R x;"),
                   SemanticError);
   CHECK_THROWS_AS(load("table R(a:int, b:int); table S(a:int); foreign key S(a) references R(b);"),
                   SemanticError);
   CHECK_THROWS_AS(load("table R(a:int); view V as SELECT * FROM W w; view W as SELECT * FROM V v;"
                        "verify v: SELECT * FROM V v == SELECT * FROM R r;"),
                   SemanticError);
}

TEST_CASE("keywords are case insensitive") {
   auto q = parse_query("select distinct x.a from R x where x.a = 1");
   CHECK(q->distinct);
   CHECK(q->where);
}

TEST_CASE("print then parse round trip") {
   const char* queries[] = {
       "SELECT * FROM R t WHERE t.a >= 12",
       "SELECT t2.* FROM I t1, R t2 WHERE t1.k = t2.k AND t1.a >= 12",
       "SELECT DISTINCT x.a AS a FROM R x, R y WHERE NOT (x.a = y.k) OR x.k <> 3",
       "SELECT x.a AS a FROM R x UNION ALL SELECT y.k AS a FROM R y",
       "SELECT x.k AS k FROM R x EXCEPT SELECT y.k AS k FROM R y",
       "SELECT x.k AS k, sum(x.a) AS s FROM R x GROUP BY x.k",
       "SELECT x.k AS k FROM R x WHERE EXISTS (SELECT * FROM R y WHERE y.a = x.k)",
       "SELECT f(x.a, 'c', true) AS v FROM R x WHERE x.a + 1 < x.k * 2",
       "SELECT x.k AS k FROM (SELECT DISTINCT r.k AS k FROM R r) x WHERE count(SELECT * FROM R z) = x.k",
   };
   for (const char* text : queries) {
      auto q1 = parse_query(text);
      std::string printed = to_sql(*q1);
      auto q2 = parse_query(printed);
      CHECK_MESSAGE(to_sql(*q2) == printed, text);
   }
   auto prog = parse_program(std::string(kRs) + "view V as SELECT r.k AS k FROM R r;\nverify v: SELECT * FROM V v == SELECT * FROM V w;");
   auto printed = to_source(prog);
   CHECK(to_source(parse_program(printed)) == printed);
}

TEST_CASE("schema inference") {
   auto p = load(std::string(kRs) + "table S(b:int, c:string);");
   auto s1 = infer_schema(*parse_query("SELECT t2.* FROM I t1, R t2 WHERE t1.k = t2.k AND t1.a >= 12"), p.env);
   CHECK(same_shape(*s1, *p.env.table("R")));
   auto s2 = infer_schema(*parse_query("SELECT * FROM R x, S y"), p.env);
   REQUIRE(s2->size() == 4);
   CHECK(s2->columns[3].type == BaseType::String);
   auto s3 = infer_schema(*parse_query("R"), p.env);
   CHECK(same_shape(*s3, *p.env.table("R")));
   auto s4 = infer_schema(*parse_query("SELECT y.c AS name, x.k AS k FROM R x, S y"), p.env);
   REQUIRE(s4->size() == 2);
   CHECK(s4->columns[0].name == "name");
   CHECK(s4->columns[0].type == BaseType::String);
   CHECK_THROWS_AS(infer_schema(*parse_query("SELECT k AS k FROM R x, R y"), p.env), SemanticError);
}

TEST_CASE("group by desugaring") {
   auto q = parse_query("SELECT x.k AS k, agg(x.a) AS a1 FROM R x GROUP BY x.k");
   auto d = desugar_groupby(q);
   CHECK_FALSE(has_groupby(*d));
   REQUIRE(d->projections.size() == 2);
   const auto& a1 = d->projections[1].expr;
   CHECK(a1->kind == ScalarAst::Kind::Agg);
   CHECK(a1->name == "agg");
   REQUIRE(a1->sub);
   CHECK(a1->sub->where);
   CHECK(d->projections[1].as == "a1");

   auto plain = parse_query("SELECT x.k AS k FROM R x WHERE x.a = 1");
   CHECK(to_sql(*desugar_groupby(plain)) == to_sql(*plain));
   auto twice = desugar_groupby(d);
   CHECK(to_sql(*twice) == to_sql(*d));

   auto nested = parse_query("SELECT y.k AS k FROM (SELECT x.k AS k, count(*) AS c FROM R x GROUP BY x.k) y WHERE y.c = 2");
   auto dn = desugar_groupby(nested);
   CHECK_FALSE(has_groupby(*dn));
   CHECK(to_sql(*dn->where) == to_sql(*nested->where));
}

TEST_CASE("grouped attribute must be projected") {
   auto p = load("table R(k:int, a:int);");
   CHECK_THROWS_AS(prepare_query(parse_query("SELECT x.a AS a FROM R x GROUP BY x.k"), p.env), SemanticError);
}

TEST_CASE("view and index inlining") {
   auto p = load(std::string(kRs) + "view V as SELECT r.k AS k FROM R r WHERE r.a = 1;\n"
                                    "view W as SELECT v.k AS k FROM V v;");
   auto q = parse_query("SELECT t2.* FROM I t1, R t2 WHERE t1.k = t2.k AND t1.a >= 12");
   auto in = inline_views(q, p.env);
   CHECK_FALSE(mentions_table(*in, "I"));
   REQUIRE(in->from[0].source->kind == QueryAst::Kind::Select);
   CHECK(in->from[0].source->projections.size() == 2);

   auto w = inline_views(parse_query("SELECT * FROM W w"), p.env);
   CHECK_FALSE(mentions_table(*w, "W"));
   CHECK_FALSE(mentions_table(*w, "V"));
   CHECK(mentions_table(*w, "R"));

   auto free = parse_query("SELECT * FROM R r");
   CHECK(to_sql(*inline_views(free, p.env)) == to_sql(*free));
}

TEST_CASE("desugaring and inlining preserve oracle results") {
   auto p = load(std::string(kRs) + "table S(k:int, b:int);\n"
                                    "view V as SELECT r.k AS k, r.a AS a FROM R r WHERE r.a >= 1;");
   const char* queries[] = {
       "SELECT x.k AS k, sum(x.a) AS s FROM R x GROUP BY x.k",
       "SELECT x.k AS k, count(*) AS c FROM S x GROUP BY x.k",
       "SELECT x.b AS b, count(x.k) AS c, max(x.k) AS m FROM S x WHERE x.k > 0 GROUP BY x.b",
       "SELECT v.a AS a FROM V v, I i WHERE v.k = i.k",
       "SELECT y.k AS k FROM (SELECT x.k AS k, count(*) AS c FROM S x GROUP BY x.k) y WHERE y.c = 2",
   };
   for (const char* text : queries) {
      auto q = parse_query(text);
      auto prepared = prepare_query(q, p.env);
      CHECK_MESSAGE(disagreements(*q, *prepared, p.env, 200) == 0, text);
   }
}

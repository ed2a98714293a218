#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "support.hpp"
#include "ueq/pipeline.hpp"

using namespace ueq;
using namespace ueq::test;

namespace {

std::string read_benchmark(const std::string& name) {
   std::ifstream in(std::string(UEQ_BENCHMARKS) + "/" + name + ".cos");
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

VerifyResult verify_one(const std::string& src, VerifyOptions opt = {}) {
   auto r = verify_source(src, opt);
   REQUIRE(r.size() == 1);
   return r[0];
}

} // namespace

TEST_CASE("fragment classification") {
   auto p = load(std::string(kPlainSchema) + kConstrainedSchema);
   auto cls = [&](const char* a, const char* b) { return classify(*parse_query(a), *parse_query(b), p.env); };
   CHECK(cls("SELECT x.a AS a FROM A x", "SELECT y.a AS a FROM B y") == Fragment::UcqBag);
   CHECK(cls("SELECT DISTINCT x.a AS a FROM A x", "DISTINCT (SELECT y.a AS a FROM B y UNION ALL SELECT z.b AS a FROM A z)") ==
         Fragment::UcqSet);
   CHECK(cls("SELECT DISTINCT x.a AS a FROM A x", "SELECT y.a AS a FROM B y") == Fragment::General);
   CHECK(cls("SELECT x.a AS a FROM A x WHERE x.a = 1", "SELECT y.a AS a FROM B y") == Fragment::General);
   CHECK(cls("SELECT x.a AS a FROM T x", "SELECT y.k AS a FROM R y") == Fragment::General);
}

TEST_CASE("not equivalent only inside the UCQ fragment") {
   auto general = verify_one("table R(a:int, b:int); verify g: SELECT x.a AS a FROM R x WHERE x.b = 1 == SELECT x.a AS a FROM R x;");
   CHECK(general.status == Status::NotProved);
   CHECK(general.fragment == Fragment::General);
   auto ucq = verify_one("table R(a:int, b:int); verify u: SELECT x.a AS a FROM R x == SELECT x.b AS a FROM R x;");
   CHECK(ucq.status == Status::NotEquivalent);
   CHECK(ucq.fragment == Fragment::UcqBag);

   auto p = load(kConstrainedSchema);
   for (int i = 0; i < 60; ++i) {
      Rng rng(static_cast<std::uint64_t>(i) + 77);
      Block b = random_block(rng, p.env, 1, true);
      Block m = changing_mutation(rng, b, p.env, true);
      auto prog = load(std::string(kConstrainedSchema) + "verify c: " + b.sql() + " == " + m.sql() + ";");
      auto r = verify(prog.verifies[0], prog.env);
      if (r.fragment == Fragment::General) CHECK(r.status != Status::NotEquivalent);
   }
}

TEST_CASE("benchmarks") {
   CHECK(verify_one(read_benchmark("index_rewrite")).status == Status::Equivalent);
   CHECK(verify_one(read_benchmark("distinct_self_join")).status == Status::Equivalent);
   CHECK(verify_one(read_benchmark("starburst")).status == Status::Equivalent);
   CHECK(verify_one(read_benchmark("selection_union")).status == Status::Equivalent);
   CHECK(verify_one(read_benchmark("arithmetic_unproved")).status == Status::NotProved);
   CHECK(verify_one(read_benchmark("count_bug")).status == Status::NotProved);
}

TEST_CASE("traces name sides") {
   auto r = verify_one(read_benchmark("index_rewrite"));
   REQUIRE_FALSE(r.trace.empty());
   for (const auto& line : r.trace)
      if (line.rfind("RULE ", 0) == 0) CHECK(line.find(" AT /") != std::string::npos);
   CHECK(r.trace.back().rfind("PERMUTATION", 0) == 0);
   VerifyOptions quiet;
   quiet.trace = false;
   CHECK(verify_one(read_benchmark("index_rewrite"), quiet).trace.empty());
}

TEST_CASE("refutation finds a witness for the count bug") {
   VerifyOptions opt;
   opt.refute = true;
   auto r = verify_one(read_benchmark("count_bug"), opt);
   CHECK(r.status == Status::NotProved);
   REQUIRE(r.witness);
   CHECK(r.witness->find("parts") != std::string::npos);
   auto e = verify_one(read_benchmark("index_rewrite"), opt);
   CHECK_FALSE(e.witness);
}

TEST_CASE("resource limits") {
   VerifyOptions opt;
   opt.node_limit = 20;
   std::string u = "(SELECT a.a AS a FROM A a UNION ALL SELECT b.a AS a FROM B b)";
   auto r = verify_one(std::string(kPlainSchema) + "verify big: SELECT w.a AS a FROM " + u + " w, " + u + " x, " + u +
                       " y, " + u + " z == SELECT w.a AS a FROM A w;", opt);
   CHECK(r.status == Status::ResourceExhausted);
   CHECK_FALSE(r.message.empty());

   auto cyc = verify_one(R"(
table P(a:int, b:int);
table Q(a:int, b:int);
key P(a);
key Q(a);
foreign key P(b) references Q(a);
foreign key Q(b) references P(a);
verify cyc: SELECT x.a AS a FROM P x == SELECT x.a AS a FROM P x, Q y WHERE x.b = y.a;
)");
   CHECK(cyc.status != Status::NotEquivalent);
}

TEST_CASE("parallel pool keeps source order") {
   std::string src = std::string(kPlainSchema);
   for (int i = 0; i < 12; ++i)
      src += "verify v" + std::to_string(i) + ": SELECT x.a AS a FROM A x == SELECT x." + (i % 2 ? "b" : "a") +
             " AS a FROM A x;\n";
   auto program = load(src);
   auto serial = verify_all(program, {}, false);
   auto parallel = verify_all(program, {}, true);
   REQUIRE(serial.size() == 12);
   for (std::size_t i = 0; i < 12; ++i) {
      CHECK(serial[i].name == "v" + std::to_string(i));
      CHECK(parallel[i].name == serial[i].name);
      CHECK(parallel[i].status == serial[i].status);
      CHECK(parallel[i].trace == serial[i].trace);
      CHECK(serial[i].status == (i % 2 ? Status::NotEquivalent : Status::Equivalent));
   }
}

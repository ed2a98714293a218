#include <benchmark/benchmark.h>

#include <fstream>
#include <map>
#include <sstream>

#include "ueq/oracle.hpp"
#include "ueq/parser.hpp"
#include "ueq/pipeline.hpp"

using namespace ueq;

namespace {

const char* kSchema = R"(
table R(k:int, a:int);
table S(k:int, b:int);
key R(k);
foreign key S(k) references R(k);
)";

struct Workload {
   AnalyzedProgram program;
   QueryPtr lhs, rhs;
   std::vector<FiniteDb> dbs;
};

const Workload& workload(std::size_t n) {
   static std::map<std::size_t, Workload> cache;
   auto it = cache.find(n);
   if (it != cache.end()) return it->second;
   Workload w{analyze(parse_program(kSchema)), {}, {}, {}};
   w.lhs = parse_query("SELECT s.b AS b, r.a AS a FROM S s, R r WHERE s.k = r.k AND r.a >= 1");
   w.rhs = parse_query("SELECT s.b AS b, r.a AS a FROM S s, R r, R r2 WHERE s.k = r.k AND r2.k = r.k AND r2.a >= 1");
   GenOptions opt;
   opt.seed = 3;
   opt.max_tuples = 4;
   w.dbs = gen_instances(w.program.env, opt, n).dbs;
   return cache.emplace(n, std::move(w)).first->second;
}

std::string benchmark_file(const std::string& name) {
   std::ifstream in(std::string(UEQ_BENCHMARKS) + "/" + name + ".cos");
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

/// The index benchmark with its verify statement repeated, for the worker pool.
AnalyzedProgram pool_program(int copies) {
   std::string src = benchmark_file("index_rewrite");
   const auto at = src.find("verify ");
   const std::string body = src.substr(src.find(':', at) + 1);
   for (int i = 0; i < copies; ++i) src += "\nverify copy" + std::to_string(i) + ":" + body;
   return analyze(parse_program(src));
}

void BM_DifferentialSerial(benchmark::State& state) {
   const auto& w = workload(static_cast<std::size_t>(state.range(0)));
   for (auto _ : state) benchmark::DoNotOptimize(differential_serial(*w.lhs, *w.rhs, w.program.env, w.dbs));
   state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DifferentialParallel(benchmark::State& state) {
   const auto& w = workload(static_cast<std::size_t>(state.range(0)));
   for (auto _ : state) benchmark::DoNotOptimize(differential_parallel(*w.lhs, *w.rhs, w.program.env, w.dbs));
   state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_VerifyPool(benchmark::State& state) {
   static const AnalyzedProgram program = pool_program(15);
   VerifyOptions opt;
   opt.trace = false;
   const bool parallel = state.range(0) != 0;
   for (auto _ : state) benchmark::DoNotOptimize(verify_all(program, opt, parallel));
}

} // namespace

BENCHMARK(BM_DifferentialSerial)->Arg(100)->Arg(1000);
BENCHMARK(BM_DifferentialParallel)->Arg(100)->Arg(1000);
BENCHMARK(BM_VerifyPool)->Arg(0)->Arg(1);

BENCHMARK_MAIN();

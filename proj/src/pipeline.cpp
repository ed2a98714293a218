#include "ueq/pipeline.hpp"

#include <chrono>
#include <set>

#include "ueq/constraints.hpp"
#include "ueq/decision.hpp"
#include "ueq/errors.hpp"
#include "ueq/oracle.hpp"
#include "ueq/parser.hpp"
#include "ueq/spnf.hpp"
#include "ueq/translator.hpp"

namespace ueq {

std::string_view to_string(Status s) {
   switch (s) {
      case Status::Equivalent: return "EQUIVALENT";
      case Status::NotEquivalent: return "NOT_EQUIVALENT";
      case Status::NotProved: return "NOT_PROVED";
      case Status::ResourceExhausted: return "RESOURCE_EXHAUSTED";
   }
   return "?";
}

std::string_view to_string(Fragment f) {
   switch (f) {
      case Fragment::UcqBag: return "ucq-bag";
      case Fragment::UcqSet: return "ucq-set";
      case Fragment::General: return "general";
   }
   return "?";
}

namespace {

bool attr_equalities(const PredAst* p) {
   if (!p || p->kind == PredAst::Kind::True) return true;
   if (p->kind == PredAst::Kind::And) return attr_equalities(p->left.get()) && attr_equalities(p->right.get());
   return p->kind == PredAst::Kind::Cmp && p->op == "=" && p->lhs->kind == ScalarAst::Kind::Attr &&
          p->rhs->kind == ScalarAst::Kind::Attr;
}

bool conjunctive(const QueryAst& q, bool allow_distinct, std::set<std::string>& tables) {
   if (q.kind != QueryAst::Kind::Select || !q.group_by.empty() || (q.distinct && !allow_distinct)) return false;
   for (const auto& f : q.from) {
      if (f.source->kind != QueryAst::Kind::Table) return false;
      tables.insert(f.source->table);
   }
   for (const auto& p : q.projections)
      if (p.kind == Projection::Kind::Expr && p.expr->kind != ScalarAst::Kind::Attr) return false;
   return attr_equalities(q.where.get());
}

bool union_of_cqs(const QueryAst& q, std::set<std::string>& tables) {
   if (q.kind == QueryAst::Kind::UnionAll) return union_of_cqs(*q.left, tables) && union_of_cqs(*q.right, tables);
   return conjunctive(q, false, tables);
}

std::optional<Fragment> fragment_of(const QueryAst& q, std::set<std::string>& tables) {
   if (union_of_cqs(q, tables)) return Fragment::UcqBag;
   tables.clear();
   if (q.kind == QueryAst::Kind::Distinct && union_of_cqs(*q.left, tables)) return Fragment::UcqSet;
   tables.clear();
   if (q.kind == QueryAst::Kind::Select && q.distinct && conjunctive(q, true, tables)) return Fragment::UcqSet;
   return std::nullopt;
}

void tables_of(const QueryAst& q, const SchemaEnv& env, std::set<std::string>& out);

void tables_of_scalar(const ScalarAst& s, const SchemaEnv& env, std::set<std::string>& out) {
   for (const auto& a : s.args) tables_of_scalar(*a, env, out);
   if (s.sub) tables_of(*s.sub, env, out);
}

void tables_of_pred(const PredAst& p, const SchemaEnv& env, std::set<std::string>& out) {
   if (p.lhs) tables_of_scalar(*p.lhs, env, out);
   if (p.rhs) tables_of_scalar(*p.rhs, env, out);
   if (p.left) tables_of_pred(*p.left, env, out);
   if (p.right) tables_of_pred(*p.right, env, out);
   if (p.sub) tables_of(*p.sub, env, out);
}

void tables_of(const QueryAst& q, const SchemaEnv& env, std::set<std::string>& out) {
   if (q.kind == QueryAst::Kind::Table) {
      if (env.is_view(q.table))
         tables_of(*env.views.at(q.table), env, out);
      else
         out.insert(q.table);
      return;
   }
   for (const auto& p : q.projections)
      if (p.expr) tables_of_scalar(*p.expr, env, out);
   for (const auto& f : q.from) tables_of(*f.source, env, out);
   if (q.where) tables_of_pred(*q.where, env, out);
   for (const auto& g : q.group_by) tables_of_scalar(*g, env, out);
   if (q.left) tables_of(*q.left, env, out);
   if (q.right) tables_of(*q.right, env, out);
}

bool constrained(const std::string& table, const SchemaEnv& env) {
   if (!env.keys_of(table).empty()) return true;
   for (const auto& fk : env.foreign_keys)
      if (fk.source == table || fk.target == table) return true;
   return false;
}

} // namespace

Fragment classify(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env) {
   std::set<std::string> tables;
   auto f1 = fragment_of(q1, tables);
   std::set<std::string> more;
   auto f2 = fragment_of(q2, more);
   if (!f1 || !f2 || *f1 != *f2) return Fragment::General;
   tables.insert(more.begin(), more.end());
   for (const auto& t : tables)
      if (constrained(t, env)) return Fragment::General;
   return *f1;
}

std::optional<std::string> refute(const PreparedVerify& v, const SchemaEnv& env, std::uint64_t seed,
                                  std::size_t instances) {
   std::set<std::string> tables;
   tables_of(*v.lhs, env, tables);
   tables_of(*v.rhs, env, tables);
   bool grew = true;
   while (grew) {
      grew = false;
      for (const auto& fk : env.foreign_keys)
         if (tables.count(fk.source) && tables.insert(fk.target).second) grew = true;
   }
   GenOptions opt;
   opt.seed = seed;
   opt.relations.assign(tables.begin(), tables.end());
   opt.extra_values = query_constants(*v.lhs);
   for (auto c : query_constants(*v.rhs)) opt.extra_values.push_back(c);

   auto search = [&](const std::vector<FiniteDb>& dbs) -> std::optional<std::string> {
      auto r = differential_serial(*v.lhs, *v.rhs, env, dbs);
      if (!r.first) return std::nullopt;
      const FiniteDb& db = dbs[*r.first];
      return db.dump(&env) + "lhs:\n" + dump_bag(eval_query(*v.lhs, env, db)) + "rhs:\n" +
             dump_bag(eval_query(*v.rhs, env, db));
   };
   try {
      GenOptions small = opt;
      small.domain = 2;
      small.extra_values.clear();
      small.max_tuples = 2;
      small.max_mult = 2;
      auto all = enumerate_instances(env, small, 20000);
      if (auto w = search(all.dbs)) return w;
      auto gen = gen_instances(env, opt, instances);
      return search(gen.dbs);
   } catch (const OracleLimit&) {
      return std::nullopt;
   }
}

VerifyResult verify(const PreparedVerify& v, const SchemaEnv& env, const VerifyOptions& opt) {
   const auto start = std::chrono::steady_clock::now();
   FreshScope scope;
   VerifyResult r;
   r.name = v.name;
   Session s;
   s.env = &env;
   s.budget = Budget(opt.timeout, opt.max_steps);
   s.chase_depth = opt.chase_depth;
   s.node_limit = opt.node_limit;
   s.trace.enabled = opt.trace;
   r.fragment = classify(*v.lhs_prepared, *v.rhs_prepared, env);
   bool proved = false;
   try {
      TupleVar out = fresh_var(v.schema);
      Expr e1 = denote_into(*v.lhs_prepared, out, env);
      Expr e2 = denote_into(*v.rhs_prepared, out, env);
      if (opt.dump_uexp) {
         Printer p;
         r.uexp_lhs = p(e1);
         r.uexp_rhs = p(e2);
      }
      s.trace_prefix = "/lhs";
      Spnf n1 = to_spnf(e1, &s);
      s.trace_prefix = "/rhs";
      Spnf n2 = to_spnf(e2, &s);
      s.trace_prefix.clear();
      if (opt.dump_spnf) {
         Printer p;
         r.spnf_lhs = to_string(n1, p);
         r.spnf_rhs = to_string(n2, p);
      }
      proved = udp(n1, n2, s);
      r.status = proved ? Status::Equivalent : r.fragment == Fragment::General ? Status::NotProved : Status::NotEquivalent;
   } catch (const ResourceExhausted& e) {
      r.status = Status::ResourceExhausted;
      r.message = e.what();
   }
   r.stats = s.stats;
   r.chase_exhausted = s.chase_exhausted;
   r.trace = s.trace.lines();
   if (opt.refute && r.status != Status::Equivalent) r.witness = refute(v, env, opt.seed, opt.refute_instances);
   r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
   return r;
}

std::vector<VerifyResult> verify_all(const AnalyzedProgram& program, const VerifyOptions& opt, bool parallel) {
   const long n = static_cast<long>(program.verifies.size());
   std::vector<VerifyResult> out(program.verifies.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel && n > 1)
   for (long i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      out[k] = verify(program.verifies[k], program.env, opt);
   }
   return out;
}

std::vector<VerifyResult> verify_source(std::string_view source, const VerifyOptions& opt) {
   auto program = analyze(parse_program(source));
   return verify_all(program, opt, false);
}

} // namespace ueq

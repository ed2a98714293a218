#include "ueq/translator.hpp"

#include "ueq/errors.hpp"

namespace ueq {

namespace {

struct Translator {
   const SchemaEnv& env;

   TupleVar lookup(const ResolvedAttr& r, const Bindings* b) {
      for (int d = 0; d < r.depth; ++d) b = b->parent;
      for (std::size_t i = 0; i < b->frame.aliases.size(); ++i)
         if (b->frame.aliases[i].first == r.alias) return b->vars[i];
      throw SemanticError("unbound alias " + r.alias);
   }

   Scalar scalar(const ScalarAst& s, const Bindings* b) {
      switch (s.kind) {
         case ScalarAst::Kind::Attr: {
            auto r = resolve_attr(s, b ? &b->frame : nullptr);
            TupleVar v = lookup(r, b);
            if (r.column) return attr(v, *r.column);
            return func("." + s.attr, {attr(v, *r.schema->opaque_column())});
         }
         case ScalarAst::Kind::Const: return constant(s.literal, s.literal_type);
         case ScalarAst::Kind::Func: {
            std::vector<Scalar> args;
            for (const auto& a : s.args) args.push_back(scalar(*a, b));
            return func(s.name, std::move(args));
         }
         case ScalarAst::Kind::Agg: {
            if (!s.sub) throw SemanticError("aggregate outside a GROUP BY query", s.pos);
            TupleVar u = fresh_var(infer_schema(*s.sub, env, b ? &b->frame : nullptr));
            return aggregate(s.name, u, query(*s.sub, u, b));
         }
      }
      throw SemanticError("unsupported expression", s.pos);
   }

   Expr predicate(const PredAst& p, const Bindings* b) {
      switch (p.kind) {
         case PredAst::Kind::True: return one();
         case PredAst::Kind::False: return zero();
         case PredAst::Kind::Cmp: {
            Scalar l = scalar(*p.lhs, b);
            Scalar r = scalar(*p.rhs, b);
            if (p.op == "=") return pred(eq_atom(l, r));
            if (p.op == "<>" || p.op == "!=") return neg(pred(eq_atom(l, r)));
            if (p.op == ">" || p.op == ">=") return pred(cmp_atom(p.op, l, r));
            if (p.op == "<") return pred(cmp_atom(">", r, l));
            if (p.op == "<=") return pred(cmp_atom(">=", r, l));
            throw SemanticError("unknown comparison " + p.op, p.pos);
         }
         case PredAst::Kind::And: return mul(predicate(*p.left, b), predicate(*p.right, b));
         case PredAst::Kind::Or: return squash(add(predicate(*p.left, b), predicate(*p.right, b)));
         case PredAst::Kind::Not: return neg(predicate(*p.left, b));
         case PredAst::Kind::Exists: {
            TupleVar u = fresh_var(infer_schema(*p.sub, env, b ? &b->frame : nullptr));
            return squash(sum(u, query(*p.sub, u, b)));
         }
      }
      throw SemanticError("unsupported predicate", p.pos);
   }

   Expr query(const QueryAst& q, const TupleVar& out, const Bindings* outer) {
      switch (q.kind) {
         case QueryAst::Kind::Table:
            if (!env.table(q.table)) throw SemanticError("view " + q.table + " was not inlined", q.pos);
            return rel(q.table, out);
         case QueryAst::Kind::Distinct: return squash(query(*q.left, out, outer));
         case QueryAst::Kind::UnionAll: return add(query(*q.left, out, outer), query(*q.right, out, outer));
         case QueryAst::Kind::Except: return mul(query(*q.left, out, outer), neg(query(*q.right, out, outer)));
         case QueryAst::Kind::Select: break;
      }
      if (!q.group_by.empty()) throw SemanticError("GROUP BY must be desugared before translation", q.pos);

      Bindings b;
      b.parent = outer;
      b.frame.parent = outer ? &outer->frame : nullptr;

      // A lone `*` or `x.*` projection binds that alias to the output variable itself.
      std::optional<std::size_t> direct;
      if (q.projections.size() == 1) {
         const auto& p = q.projections[0];
         if (p.kind == Projection::Kind::Star && q.from.size() == 1) direct = 0;
         if (p.kind == Projection::Kind::AliasStar)
            for (std::size_t i = 0; i < q.from.size(); ++i)
               if (q.from[i].alias == p.alias) direct = i;
      }

      std::vector<TupleVar> summed;
      for (std::size_t i = 0; i < q.from.size(); ++i) {
         auto sch = source_schema(*q.from[i].source, env, outer ? &outer->frame : nullptr);
         b.frame.aliases.emplace_back(q.from[i].alias, sch);
         if (direct && *direct == i) {
            b.vars.push_back(out);
         } else {
            b.vars.push_back(fresh_var(sch));
            summed.push_back(b.vars.back());
         }
      }

      std::vector<Expr> factors;
      if (!direct) {
         std::size_t col = 0;
         auto bind_all = [&](std::size_t i) {
            const auto& v = b.vars[i];
            for (std::size_t j = 0; j < v.schema->size(); ++j) factors.push_back(pred(eq_atom(attr(out, col++), attr(v, j))));
         };
         for (const auto& p : q.projections) {
            switch (p.kind) {
               case Projection::Kind::Star:
                  for (std::size_t i = 0; i < q.from.size(); ++i) bind_all(i);
                  break;
               case Projection::Kind::AliasStar:
                  for (std::size_t i = 0; i < q.from.size(); ++i)
                     if (q.from[i].alias == p.alias) bind_all(i);
                  break;
               case Projection::Kind::Expr: factors.push_back(pred(eq_atom(attr(out, col++), scalar(*p.expr, &b)))); break;
            }
         }
      }
      if (q.where) factors.push_back(predicate(*q.where, &b));
      for (std::size_t i = 0; i < q.from.size(); ++i) factors.push_back(query(*q.from[i].source, b.vars[i], outer));
      Expr body = sum_all(summed, mul_all(factors));
      return q.distinct ? squash(body) : body;
   }
};

} // namespace

Expr denote_into(const QueryAst& q, const TupleVar& out, const SchemaEnv& env, const Bindings* outer) {
   return Translator{env}.query(q, out, outer);
}

Denotation denote(const QueryAst& q, const SchemaEnv& env) {
   TupleVar out = fresh_var(infer_schema(q, env));
   return {out, denote_into(q, out, env)};
}

} // namespace ueq

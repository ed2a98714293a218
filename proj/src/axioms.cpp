#include "ueq/axioms.hpp"

#include <functional>
#include <map>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

struct AxiomInfo {
   Axiom axiom;
   const char* name;
};

const AxiomInfo kAxioms[] = {
    {Axiom::AddZero, "add-zero"},
    {Axiom::AddComm, "add-comm"},
    {Axiom::AddAssoc, "add-assoc"},
    {Axiom::MulOne, "mul-one"},
    {Axiom::MulZero, "mul-zero"},
    {Axiom::MulComm, "prod-comm"},
    {Axiom::MulAssoc, "prod-assoc"},
    {Axiom::DistrL, "distr-prod-plus-l"},
    {Axiom::DistrR, "distr-prod-plus-r"},
    {Axiom::SquashZero, "squash-zero"},
    {Axiom::SquashOnePlus, "squash-one-plus"},
    {Axiom::SquashAddSquash, "squash-add-squash"},
    {Axiom::SquashMul, "pull-merely"},
    {Axiom::SquashSquare, "squash-square"},
    {Axiom::SquashSelf, "squash-self"},
    {Axiom::SquashIdempotent, "squash-idempotent"},
    {Axiom::NotZero, "not-zero"},
    {Axiom::NotMul, "not-mul"},
    {Axiom::NotAdd, "not-add"},
    {Axiom::PullNot, "pull-not"},
    {Axiom::NotSquash, "not-squash"},
    {Axiom::SquashNot, "squash-not"},
    {Axiom::DistrSum, "distr-sum"},
    {Axiom::SumSwap, "sum-swap"},
    {Axiom::PullSumL, "pull-sum-l"},
    {Axiom::PullSumR, "pull-sum-r"},
    {Axiom::SquashSumSquash, "squash-sum-squash"},
    {Axiom::PredSquash, "pred-squash"},
    {Axiom::ExcludedMiddle, "excluded-middle"},
    {Axiom::EqSubst, "eq-subst"},
    {Axiom::SumEqOne, "sum-eq-one"},
    {Axiom::SumSubstEq, "sum-subst-eq"},
};

using Kind = ExprNode::Kind;

[[noreturn]] void mismatch(Axiom a, const std::string& why) {
   throw AxiomMismatch(std::string(axiom_name(a)) + ": " + why);
}

void expect(bool cond, Axiom a, const char* why) {
   if (!cond) mismatch(a, why);
}

void flatten_mul(const Expr& e, std::vector<Expr>& out) {
   if (e->kind == Kind::Mul) {
      flatten_mul(e->a, out);
      flatten_mul(e->b, out);
   } else {
      out.push_back(e);
   }
}

bool mentions(const Scalar& s, int var) {
   return free_vars(s).count(var) > 0;
}

// Finds one determining equality per column of v among the product factors.
bool split_determining(const Expr& body, const TupleVar& v, std::vector<Scalar>& values, std::vector<Expr>& rest) {
   std::vector<Expr> factors;
   flatten_mul(body, factors);
   std::size_t n = v.schema ? v.schema->size() : 0;
   values.assign(n, nullptr);
   for (const auto& f : factors) {
      if (f->kind == Kind::Pred && f->pred.kind == PredAtom::Kind::Eq) {
         const auto& p = f->pred;
         auto take = [&](const Scalar& side, const Scalar& other) {
            if (side->kind == ScalarNode::Kind::Attr && side->var == v && side->column < n && !values[side->column] &&
                !mentions(other, v.id)) {
               values[side->column] = other;
               return true;
            }
            return false;
         };
         if (take(p.lhs, p.rhs) || take(p.rhs, p.lhs)) continue;
      }
      rest.push_back(f);
   }
   for (const auto& x : values)
      if (!x) return false;
   return n > 0;
}

Expr pull_sum(const Expr& x, const Expr& s, bool left) {
   TupleVar v = s->var;
   Expr body = s->a;
   if (free_vars(x).count(v.id)) {
      TupleVar fresh = fresh_var(v.schema);
      body = rename(body, v, fresh);
      v = fresh;
   }
   return sum(v, left ? mul(x, body) : mul(body, x));
}

Expr rewrite(const Expr& e, Axiom ax, const AxiomArgs& args) {
   switch (ax) {
      case Axiom::AddZero:
         expect(e->kind == Kind::Add && e->b->kind == Kind::Zero, ax, "expected x + 0");
         return e->a;
      case Axiom::AddComm:
         expect(e->kind == Kind::Add, ax, "expected a sum");
         return add(e->b, e->a);
      case Axiom::AddAssoc:
         expect(e->kind == Kind::Add && e->a->kind == Kind::Add, ax, "expected (x + y) + z");
         return add(e->a->a, add(e->a->b, e->b));
      case Axiom::MulOne:
         expect(e->kind == Kind::Mul && e->b->kind == Kind::One, ax, "expected x * 1");
         return e->a;
      case Axiom::MulZero:
         expect(e->kind == Kind::Mul && e->b->kind == Kind::Zero, ax, "expected x * 0");
         return zero();
      case Axiom::MulComm:
         expect(e->kind == Kind::Mul, ax, "expected a product");
         return mul(e->b, e->a);
      case Axiom::MulAssoc:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Mul, ax, "expected (x * y) * z");
         return mul(e->a->a, mul(e->a->b, e->b));
      case Axiom::DistrL:
         expect(e->kind == Kind::Mul && e->b->kind == Kind::Add, ax, "expected x * (y + z)");
         return add(mul(e->a, e->b->a), mul(e->a, e->b->b));
      case Axiom::DistrR:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Add, ax, "expected (x + y) * z");
         return add(mul(e->a->a, e->b), mul(e->a->b, e->b));
      case Axiom::SquashZero:
         expect(e->kind == Kind::Squash && e->a->kind == Kind::Zero, ax, "expected ||0||");
         return zero();
      case Axiom::SquashOnePlus:
         expect(e->kind == Kind::Squash && e->a->kind == Kind::Add && e->a->a->kind == Kind::One, ax, "expected ||1 + x||");
         return one();
      case Axiom::SquashAddSquash:
         expect(e->kind == Kind::Squash && e->a->kind == Kind::Add && e->a->a->kind == Kind::Squash, ax,
                "expected ||(||x|| + y)||");
         return squash(add(e->a->a->a, e->a->b));
      case Axiom::SquashMul:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Squash && e->b->kind == Kind::Squash, ax, "expected ||x|| * ||y||");
         return squash(mul(e->a->a, e->b->a));
      case Axiom::SquashSquare:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Squash && e->b->kind == Kind::Squash &&
                    alpha_equal(e->a, e->b),
                ax, "expected ||x|| * ||x||");
         return e->a;
      case Axiom::SquashSelf:
         expect(e->kind == Kind::Mul && e->b->kind == Kind::Squash && alpha_equal(e->a, e->b->a), ax, "expected x * ||x||");
         return e->a;
      case Axiom::SquashIdempotent: {
         expect(e->kind == Kind::Squash, ax, "expected ||x||");
         Expr x = e->a;
         Expr cur = mul(x, x);
         for (const auto& step : args.proof) cur = apply_axiom(cur, step.axiom, step.path);
         expect(alpha_equal(cur, x), ax, "proof does not rewrite x * x into x");
         return x;
      }
      case Axiom::NotZero:
         expect(e->kind == Kind::Not && e->a->kind == Kind::Zero, ax, "expected not(0)");
         return one();
      case Axiom::NotMul:
         expect(e->kind == Kind::Not && e->a->kind == Kind::Mul, ax, "expected not(x * y)");
         return squash(add(neg(e->a->a), neg(e->a->b)));
      case Axiom::NotAdd:
         expect(e->kind == Kind::Not && e->a->kind == Kind::Add, ax, "expected not(x + y)");
         return mul(neg(e->a->a), neg(e->a->b));
      case Axiom::PullNot:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Not && e->b->kind == Kind::Not, ax, "expected not(x) * not(y)");
         return neg(add(e->a->a, e->b->a));
      case Axiom::NotSquash:
         expect(e->kind == Kind::Not && e->a->kind == Kind::Squash, ax, "expected not(||x||)");
         return neg(e->a->a);
      case Axiom::SquashNot:
         expect(e->kind == Kind::Squash && e->a->kind == Kind::Not, ax, "expected ||not(x)||");
         return e->a;
      case Axiom::DistrSum:
         expect(e->kind == Kind::Sum && e->a->kind == Kind::Add, ax, "expected sum_t (f1 + f2)");
         return add(sum(e->var, e->a->a), sum(e->var, e->a->b));
      case Axiom::SumSwap:
         expect(e->kind == Kind::Sum && e->a->kind == Kind::Sum && e->var != e->a->var, ax, "expected sum_t1 sum_t2 f");
         return sum(e->a->var, sum(e->var, e->a->a));
      case Axiom::PullSumL:
         expect(e->kind == Kind::Mul && e->b->kind == Kind::Sum, ax, "expected x * sum_t f");
         return pull_sum(e->a, e->b, true);
      case Axiom::PullSumR:
         expect(e->kind == Kind::Mul && e->a->kind == Kind::Sum, ax, "expected (sum_t f) * x");
         return pull_sum(e->b, e->a, false);
      case Axiom::SquashSumSquash:
         expect(e->kind == Kind::Squash && e->a->kind == Kind::Sum, ax, "expected ||sum_t f||");
         return squash(sum(e->a->var, squash(e->a->a)));
      case Axiom::PredSquash:
         expect(e->kind == Kind::Pred, ax, "expected a predicate");
         return squash(e);
      case Axiom::ExcludedMiddle: {
         expect(e->kind == Kind::One, ax, "expected 1");
         expect(args.e1 && args.e2, ax, "needs e1 and e2");
         auto p = pred(eq_atom(args.e1, args.e2));
         return add(p, neg(p));
      }
      case Axiom::EqSubst: {
         expect(e->kind == Kind::Mul && e->b->kind == Kind::Pred && e->b->pred.kind == PredAtom::Kind::Eq, ax,
                "expected x * [e1 = e2]");
         return mul(replace_scalar(e->a, e->b->pred.lhs, e->b->pred.rhs), e->b);
      }
      case Axiom::SumEqOne: {
         expect(e->kind == Kind::Sum, ax, "expected a sum");
         std::vector<Scalar> values;
         std::vector<Expr> rest;
         expect(split_determining(e->a, e->var, values, rest) && rest.empty(), ax, "expected sum_t [t = e]");
         return one();
      }
      case Axiom::SumSubstEq: {
         expect(e->kind == Kind::Sum, ax, "expected a sum");
         std::vector<Scalar> values;
         std::vector<Expr> rest;
         expect(split_determining(e->a, e->var, values, rest), ax, "no determining equality for every column");
         Expr f = mul_all(rest);
         const auto& first = values[0];
         bool whole = first->kind == ScalarNode::Kind::Attr && first->var.schema && e->var.schema &&
                      same_shape(*first->var.schema, *e->var.schema);
         for (std::size_t i = 0; whole && i < values.size(); ++i)
            whole = values[i]->kind == ScalarNode::Kind::Attr && values[i]->var == first->var && values[i]->column == i;
         if (whole) return rename(f, e->var, first->var);
         try {
            return substitute_columns(f, e->var, values);
         } catch (const SemanticError& err) {
            mismatch(ax, err.message());
         }
      }
   }
   mismatch(ax, "unknown axiom");
}

Scalar replace_in_scalar(const Scalar& s, const Scalar& from, const Scalar& to, const std::set<int>& guard);
Expr replace_in_expr(const Expr& e, const Scalar& from, const Scalar& to, const std::set<int>& guard);

Scalar replace_in_scalar(const Scalar& s, const Scalar& from, const Scalar& to, const std::set<int>& guard) {
   if (same_scalar(s, from)) return to;
   switch (s->kind) {
      case ScalarNode::Kind::Func: {
         auto n = std::make_shared<ScalarNode>(*s);
         for (auto& a : n->args) a = replace_in_scalar(a, from, to, guard);
         return n;
      }
      case ScalarNode::Kind::Agg: {
         if (free_vars(from).count(s->var.id)) return s;
         TupleVar v = s->var;
         Expr body = s->body;
         if (guard.count(v.id)) {
            TupleVar fresh = fresh_var(v.schema);
            body = rename(body, v, fresh);
            v = fresh;
         }
         return aggregate(s->name, v, replace_in_expr(body, from, to, guard));
      }
      default: return s;
   }
}

Expr replace_in_expr(const Expr& e, const Scalar& from, const Scalar& to, const std::set<int>& guard) {
   switch (e->kind) {
      case Kind::Zero:
      case Kind::One:
      case Kind::Rel: return e;
      case Kind::Add: return add(replace_in_expr(e->a, from, to, guard), replace_in_expr(e->b, from, to, guard));
      case Kind::Mul: return mul(replace_in_expr(e->a, from, to, guard), replace_in_expr(e->b, from, to, guard));
      case Kind::Squash: return squash(replace_in_expr(e->a, from, to, guard));
      case Kind::Not: return neg(replace_in_expr(e->a, from, to, guard));
      case Kind::Sum: {
         if (free_vars(from).count(e->var.id)) return e;
         TupleVar v = e->var;
         Expr body = e->a;
         if (guard.count(v.id)) {
            TupleVar fresh = fresh_var(v.schema);
            body = rename(body, v, fresh);
            v = fresh;
         }
         return sum(v, replace_in_expr(body, from, to, guard));
      }
      case Kind::Pred: {
         PredAtom p = e->pred;
         p.lhs = replace_in_scalar(p.lhs, from, to, guard);
         p.rhs = replace_in_scalar(p.rhs, from, to, guard);
         return pred(p);
      }
   }
   return e;
}

} // namespace

std::string_view axiom_name(Axiom a) {
   for (const auto& info : kAxioms)
      if (info.axiom == a) return info.name;
   return "?";
}

std::optional<Axiom> axiom_from_name(std::string_view name) {
   for (const auto& info : kAxioms)
      if (name == info.name) return info.axiom;
   return std::nullopt;
}

const std::vector<Axiom>& all_axioms() {
   static const std::vector<Axiom> list = [] {
      std::vector<Axiom> v;
      for (const auto& info : kAxioms) v.push_back(info.axiom);
      return v;
   }();
   return list;
}

std::string path_string(const Path& p) {
   std::string out = "/";
   for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) out += "/";
      out += std::to_string(p[i]);
   }
   return out;
}

Expr subterm(const Expr& e, const Path& path) {
   Expr cur = e;
   for (int step : path) {
      if (step == 0 && cur->a)
         cur = cur->a;
      else if (step == 1 && cur->b)
         cur = cur->b;
      else
         throw AxiomMismatch("invalid path " + path_string(path));
   }
   return cur;
}

Expr replace_at(const Expr& e, const Path& path, const Expr& replacement) {
   std::function<Expr(const Expr&, std::size_t)> go = [&](const Expr& cur, std::size_t depth) -> Expr {
      if (depth == path.size()) return replacement;
      auto n = std::make_shared<ExprNode>(*cur);
      int step = path[depth];
      if (step == 0 && cur->a)
         n->a = go(cur->a, depth + 1);
      else if (step == 1 && cur->b)
         n->b = go(cur->b, depth + 1);
      else
         throw AxiomMismatch("invalid path " + path_string(path));
      return n;
   };
   return go(e, 0);
}

Expr apply_axiom(const Expr& e, Axiom axiom, const Path& path, const AxiomArgs& args) {
   return replace_at(e, path, rewrite(subterm(e, path), axiom, args));
}

Expr replace_scalar(const Expr& e, const Scalar& from, const Scalar& to) {
   return replace_in_expr(e, from, to, free_vars(to));
}

} // namespace ueq

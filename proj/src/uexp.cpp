#include "ueq/uexp.hpp"

#include <functional>

#include "ueq/errors.hpp"

namespace ueq {

namespace {
thread_local int next_var_id = 0;
}

TupleVar fresh_var(SchemaPtr schema) {
   return TupleVar{next_var_id++, std::move(schema)};
}

FreshScope::FreshScope() : saved_(next_var_id) {
   next_var_id = 0;
}

FreshScope::~FreshScope() {
   next_var_id = std::max(saved_, next_var_id);
}

std::string var_name(const TupleVar& v) {
   return "t" + std::to_string(v.id);
}

// ---- construction ----

Scalar attr(const TupleVar& v, std::size_t column) {
   auto n = std::make_shared<ScalarNode>();
   n->kind = ScalarNode::Kind::Attr;
   n->var = v;
   n->column = column;
   if (v.schema && column < v.schema->size()) n->type = v.schema->columns[column].type;
   return n;
}

Scalar constant(std::string value, BaseType type) {
   auto n = std::make_shared<ScalarNode>();
   n->kind = ScalarNode::Kind::Const;
   n->value = std::move(value);
   n->type = type;
   return n;
}

Scalar func(std::string name, std::vector<Scalar> args) {
   auto n = std::make_shared<ScalarNode>();
   n->kind = ScalarNode::Kind::Func;
   n->name = std::move(name);
   n->args = std::move(args);
   n->type = BaseType::Any;
   return n;
}

Scalar aggregate(std::string name, const TupleVar& bound, Expr body) {
   auto n = std::make_shared<ScalarNode>();
   n->kind = ScalarNode::Kind::Agg;
   n->name = std::move(name);
   n->var = bound;
   n->body = std::move(body);
   n->type = BaseType::Any;
   return n;
}

PredAtom eq_atom(Scalar a, Scalar b) {
   PredAtom p;
   p.kind = PredAtom::Kind::Eq;
   p.lhs = std::move(a);
   p.rhs = std::move(b);
   return p;
}

PredAtom cmp_atom(std::string op, Scalar a, Scalar b) {
   PredAtom p;
   p.kind = PredAtom::Kind::Cmp;
   p.op = std::move(op);
   p.lhs = std::move(a);
   p.rhs = std::move(b);
   return p;
}

namespace {
Expr node(ExprNode::Kind k, Expr a = nullptr, Expr b = nullptr) {
   auto n = std::make_shared<ExprNode>();
   n->kind = k;
   n->a = std::move(a);
   n->b = std::move(b);
   return n;
}
} // namespace

Expr zero() {
   static const Expr z = node(ExprNode::Kind::Zero);
   return z;
}

Expr one() {
   static const Expr o = node(ExprNode::Kind::One);
   return o;
}

Expr add(Expr a, Expr b) { return node(ExprNode::Kind::Add, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return node(ExprNode::Kind::Mul, std::move(a), std::move(b)); }
Expr squash(Expr a) { return node(ExprNode::Kind::Squash, std::move(a)); }
Expr neg(Expr a) { return node(ExprNode::Kind::Not, std::move(a)); }

Expr sum(const TupleVar& v, Expr body) {
   auto n = std::make_shared<ExprNode>();
   n->kind = ExprNode::Kind::Sum;
   n->var = v;
   n->a = std::move(body);
   return n;
}

Expr pred(PredAtom p) {
   auto n = std::make_shared<ExprNode>();
   n->kind = ExprNode::Kind::Pred;
   n->pred = std::move(p);
   return n;
}

Expr rel(std::string name, const TupleVar& v) {
   auto n = std::make_shared<ExprNode>();
   n->kind = ExprNode::Kind::Rel;
   n->rel = std::move(name);
   n->var = v;
   return n;
}

Expr add_all(const std::vector<Expr>& xs) {
   if (xs.empty()) return zero();
   Expr acc = xs[0];
   for (std::size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
   return acc;
}

Expr mul_all(const std::vector<Expr>& xs) {
   if (xs.empty()) return one();
   Expr acc = xs[0];
   for (std::size_t i = 1; i < xs.size(); ++i) acc = mul(acc, xs[i]);
   return acc;
}

Expr sum_all(const std::vector<TupleVar>& vs, Expr body) {
   for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = sum(*it, body);
   return body;
}

// ---- comparison ----

namespace {
template <class T>
int cmp3(const T& a, const T& b) {
   return a < b ? -1 : (b < a ? 1 : 0);
}

std::string canonical_agg(const Scalar& s);
} // namespace

int compare(const Scalar& a, const Scalar& b) {
   if (a.get() == b.get()) return 0;
   if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind))) return c;
   switch (a->kind) {
      case ScalarNode::Kind::Attr:
         if (int c = cmp3(a->var.id, b->var.id)) return c;
         return cmp3(a->column, b->column);
      case ScalarNode::Kind::Const:
         if (int c = cmp3(static_cast<int>(a->type), static_cast<int>(b->type))) return c;
         return cmp3(a->value, b->value);
      case ScalarNode::Kind::Func: {
         if (int c = cmp3(a->name, b->name)) return c;
         if (int c = cmp3(a->args.size(), b->args.size())) return c;
         for (std::size_t i = 0; i < a->args.size(); ++i)
            if (int c = compare(a->args[i], b->args[i])) return c;
         return 0;
      }
      case ScalarNode::Kind::Agg:
         if (int c = cmp3(a->name, b->name)) return c;
         return cmp3(canonical_agg(a), canonical_agg(b));
   }
   return 0;
}

bool same_scalar(const Scalar& a, const Scalar& b) {
   return compare(a, b) == 0;
}

int compare(const PredAtom& a, const PredAtom& b) {
   if (int c = cmp3(static_cast<int>(a.kind), static_cast<int>(b.kind))) return c;
   if (int c = cmp3(a.op, b.op)) return c;
   if (int c = compare(a.lhs, b.lhs)) return c;
   return compare(a.rhs, b.rhs);
}

bool operator==(const PredAtom& a, const PredAtom& b) {
   return compare(a, b) == 0;
}

// ---- free variables ----

namespace {

void free_expr(const Expr& e, std::map<int, TupleVar>& out, std::set<int>& bound);

void free_scalar(const Scalar& s, std::map<int, TupleVar>& out, std::set<int>& bound) {
   switch (s->kind) {
      case ScalarNode::Kind::Attr:
         if (!bound.count(s->var.id)) out.emplace(s->var.id, s->var);
         return;
      case ScalarNode::Kind::Const: return;
      case ScalarNode::Kind::Func:
         for (const auto& a : s->args) free_scalar(a, out, bound);
         return;
      case ScalarNode::Kind::Agg: {
         bool added = bound.insert(s->var.id).second;
         free_expr(s->body, out, bound);
         if (added) bound.erase(s->var.id);
         return;
      }
   }
}

void free_expr(const Expr& e, std::map<int, TupleVar>& out, std::set<int>& bound) {
   switch (e->kind) {
      case ExprNode::Kind::Zero:
      case ExprNode::Kind::One: return;
      case ExprNode::Kind::Add:
      case ExprNode::Kind::Mul:
         free_expr(e->a, out, bound);
         free_expr(e->b, out, bound);
         return;
      case ExprNode::Kind::Squash:
      case ExprNode::Kind::Not: free_expr(e->a, out, bound); return;
      case ExprNode::Kind::Sum: {
         bool added = bound.insert(e->var.id).second;
         free_expr(e->a, out, bound);
         if (added) bound.erase(e->var.id);
         return;
      }
      case ExprNode::Kind::Pred:
         free_scalar(e->pred.lhs, out, bound);
         free_scalar(e->pred.rhs, out, bound);
         return;
      case ExprNode::Kind::Rel:
         if (!bound.count(e->var.id)) out.emplace(e->var.id, e->var);
         return;
   }
}

std::set<int> keys_of(const std::map<int, TupleVar>& m) {
   std::set<int> out;
   for (const auto& [k, _] : m) out.insert(k);
   return out;
}

} // namespace

std::map<int, TupleVar> free_var_map(const Expr& e) {
   std::map<int, TupleVar> out;
   std::set<int> bound;
   free_expr(e, out, bound);
   return out;
}

void collect_free(const Scalar& s, std::map<int, TupleVar>& out) {
   std::set<int> bound;
   free_scalar(s, out, bound);
}

std::set<int> free_vars(const Expr& e) {
   return keys_of(free_var_map(e));
}

std::set<int> free_vars(const Scalar& s) {
   std::map<int, TupleVar> m;
   collect_free(s, m);
   return keys_of(m);
}

std::set<int> free_vars(const PredAtom& p) {
   std::map<int, TupleVar> m;
   collect_free(p.lhs, m);
   collect_free(p.rhs, m);
   return keys_of(m);
}

std::size_t node_count(const Expr& e) {
   std::function<std::size_t(const Scalar&)> sc = [&](const Scalar& s) -> std::size_t {
      std::size_t n = 1;
      for (const auto& a : s->args) n += sc(a);
      if (s->body) n += node_count(s->body);
      return n;
   };
   switch (e->kind) {
      case ExprNode::Kind::Add:
      case ExprNode::Kind::Mul: return 1 + node_count(e->a) + node_count(e->b);
      case ExprNode::Kind::Squash:
      case ExprNode::Kind::Not:
      case ExprNode::Kind::Sum: return 1 + node_count(e->a);
      case ExprNode::Kind::Pred: return 1 + sc(e->pred.lhs) + sc(e->pred.rhs);
      default: return 1;
   }
}

// ---- substitution ----

namespace {

std::set<int> range_vars(const VarSubst& s) {
   std::set<int> out;
   for (const auto& [_, v] : s.rename) out.insert(v.id);
   for (const auto& [_, cols] : s.columns)
      for (const auto& c : cols)
         for (int id : free_vars(c)) out.insert(id);
   return out;
}

Expr subst_expr(const Expr& e, const VarSubst& s, const std::set<int>& range);

// Enters a binder: drops it from the substitution and renames it away from the range.
TupleVar enter_binder(const TupleVar& v, const VarSubst& s, const std::set<int>& range, VarSubst& inner, Expr& body) {
   inner = s;
   inner.rename.erase(v.id);
   inner.columns.erase(v.id);
   if (!range.count(v.id) || inner.empty()) return v;
   TupleVar fresh = fresh_var(v.schema);
   VarSubst r;
   r.rename[v.id] = fresh;
   body = subst_expr(body, r, {fresh.id});
   return fresh;
}

Scalar subst_scalar(const Scalar& sc, const VarSubst& s, const std::set<int>& range) {
   switch (sc->kind) {
      case ScalarNode::Kind::Attr: {
         if (auto it = s.rename.find(sc->var.id); it != s.rename.end()) return attr(it->second, sc->column);
         if (auto it = s.columns.find(sc->var.id); it != s.columns.end()) {
            if (sc->column >= it->second.size()) throw SemanticError("substitution arity mismatch for " + var_name(sc->var));
            return it->second[sc->column];
         }
         return sc;
      }
      case ScalarNode::Kind::Const: return sc;
      case ScalarNode::Kind::Func: {
         std::vector<Scalar> args;
         bool changed = false;
         for (const auto& a : sc->args) {
            args.push_back(subst_scalar(a, s, range));
            changed |= args.back() != a;
         }
         if (!changed) return sc;
         auto n = std::make_shared<ScalarNode>(*sc);
         n->args = std::move(args);
         return n;
      }
      case ScalarNode::Kind::Agg: {
         VarSubst inner;
         Expr body = sc->body;
         TupleVar v = enter_binder(sc->var, s, range, inner, body);
         if (inner.empty() && v == sc->var) return sc;
         return aggregate(sc->name, v, inner.empty() ? body : subst_expr(body, inner, range));
      }
   }
   return sc;
}

PredAtom subst_pred(const PredAtom& p, const VarSubst& s, const std::set<int>& range) {
   PredAtom q = p;
   q.lhs = subst_scalar(p.lhs, s, range);
   q.rhs = subst_scalar(p.rhs, s, range);
   return q;
}

Expr subst_expr(const Expr& e, const VarSubst& s, const std::set<int>& range) {
   switch (e->kind) {
      case ExprNode::Kind::Zero:
      case ExprNode::Kind::One: return e;
      case ExprNode::Kind::Add: return add(subst_expr(e->a, s, range), subst_expr(e->b, s, range));
      case ExprNode::Kind::Mul: return mul(subst_expr(e->a, s, range), subst_expr(e->b, s, range));
      case ExprNode::Kind::Squash: return squash(subst_expr(e->a, s, range));
      case ExprNode::Kind::Not: return neg(subst_expr(e->a, s, range));
      case ExprNode::Kind::Sum: {
         VarSubst inner;
         Expr body = e->a;
         TupleVar v = enter_binder(e->var, s, range, inner, body);
         return sum(v, inner.empty() ? body : subst_expr(body, inner, range));
      }
      case ExprNode::Kind::Pred: return pred(subst_pred(e->pred, s, range));
      case ExprNode::Kind::Rel: {
         if (auto it = s.rename.find(e->var.id); it != s.rename.end()) return rel(e->rel, it->second);
         if (s.columns.count(e->var.id))
            throw SemanticError("cannot replace the columns of " + var_name(e->var) + " inside " + e->rel + "(...)");
         return e;
      }
   }
   return e;
}

} // namespace

Expr substitute(const Expr& e, const VarSubst& s) {
   if (s.empty()) return e;
   return subst_expr(e, s, range_vars(s));
}

Scalar substitute(const Scalar& e, const VarSubst& s) {
   if (s.empty()) return e;
   return subst_scalar(e, s, range_vars(s));
}

PredAtom substitute(const PredAtom& p, const VarSubst& s) {
   if (s.empty()) return p;
   return subst_pred(p, s, range_vars(s));
}

Expr rename(const Expr& e, const TupleVar& from, const TupleVar& to) {
   if (from == to) return e;
   VarSubst s;
   s.rename[from.id] = to;
   return substitute(e, s);
}

Expr substitute_columns(const Expr& e, const TupleVar& v, const std::vector<Scalar>& replacement) {
   if (v.schema && replacement.size() != v.schema->size())
      throw SemanticError("substitution for " + var_name(v) + " needs " + std::to_string(v.schema->size()) + " columns");
   VarSubst s;
   s.columns[v.id] = replacement;
   return substitute(e, s);
}

// ---- alpha equality ----

namespace {

struct AlphaEnv {
   std::map<int, int> ab, ba;
};

bool alpha_var(int a, int b, const AlphaEnv& env) {
   auto ia = env.ab.find(a);
   auto ib = env.ba.find(b);
   if (ia == env.ab.end() && ib == env.ba.end()) return a == b;
   return ia != env.ab.end() && ia->second == b;
}

bool alpha_expr(const Expr& a, const Expr& b, AlphaEnv& env);

bool alpha_scalar(const Scalar& a, const Scalar& b, AlphaEnv& env) {
   if (a->kind != b->kind) return false;
   switch (a->kind) {
      case ScalarNode::Kind::Attr: return a->column == b->column && alpha_var(a->var.id, b->var.id, env);
      case ScalarNode::Kind::Const: return a->type == b->type && a->value == b->value;
      case ScalarNode::Kind::Func:
         if (a->name != b->name || a->args.size() != b->args.size()) return false;
         for (std::size_t i = 0; i < a->args.size(); ++i)
            if (!alpha_scalar(a->args[i], b->args[i], env)) return false;
         return true;
      case ScalarNode::Kind::Agg: {
         if (a->name != b->name) return false;
         AlphaEnv inner = env;
         inner.ab[a->var.id] = b->var.id;
         inner.ba[b->var.id] = a->var.id;
         return alpha_expr(a->body, b->body, inner);
      }
   }
   return false;
}

bool alpha_expr(const Expr& a, const Expr& b, AlphaEnv& env) {
   if (a->kind != b->kind) return false;
   switch (a->kind) {
      case ExprNode::Kind::Zero:
      case ExprNode::Kind::One: return true;
      case ExprNode::Kind::Add:
      case ExprNode::Kind::Mul: return alpha_expr(a->a, b->a, env) && alpha_expr(a->b, b->b, env);
      case ExprNode::Kind::Squash:
      case ExprNode::Kind::Not: return alpha_expr(a->a, b->a, env);
      case ExprNode::Kind::Sum: {
         if (a->var.schema && b->var.schema && !same_shape(*a->var.schema, *b->var.schema)) return false;
         AlphaEnv inner = env;
         inner.ab[a->var.id] = b->var.id;
         inner.ba[b->var.id] = a->var.id;
         return alpha_expr(a->a, b->a, inner);
      }
      case ExprNode::Kind::Pred:
         return a->pred.kind == b->pred.kind && a->pred.op == b->pred.op && alpha_scalar(a->pred.lhs, b->pred.lhs, env) &&
                alpha_scalar(a->pred.rhs, b->pred.rhs, env);
      case ExprNode::Kind::Rel: return a->rel == b->rel && alpha_var(a->var.id, b->var.id, env);
   }
   return false;
}

} // namespace

bool alpha_equal(const Expr& a, const Expr& b) {
   AlphaEnv env;
   return alpha_expr(a, b, env);
}

bool alpha_equal(const Scalar& a, const Scalar& b) {
   AlphaEnv env;
   return alpha_scalar(a, b, env);
}

// ---- printing ----

std::string Printer::name(const TupleVar& v) {
   if (!opt_.renumber) return var_name(v);
   auto it = numbering_.find(v.id);
   if (it == numbering_.end()) it = numbering_.emplace(v.id, static_cast<int>(numbering_.size()) + 1).first;
   return "t" + std::to_string(it->second);
}

std::string Printer::operator()(const Scalar& s) {
   switch (s->kind) {
      case ScalarNode::Kind::Attr: {
         std::string col = "#" + std::to_string(s->column);
         if (s->var.schema && s->column < s->var.schema->size()) {
            const auto& c = s->var.schema->columns[s->column];
            col = c.type == BaseType::Opaque ? "??" : c.name;
         }
         return name(s->var) + "." + col;
      }
      case ScalarNode::Kind::Const:
         if (s->type == BaseType::String) return "'" + s->value + "'";
         return s->value;
      case ScalarNode::Kind::Func: {
         static const std::string infix = "+-*/";
         if (s->args.size() == 2 && s->name.size() == 1 && infix.find(s->name[0]) != std::string::npos)
            return "(" + (*this)(s->args[0]) + " " + s->name + " " + (*this)(s->args[1]) + ")";
         std::string out = s->name + "(";
         for (std::size_t i = 0; i < s->args.size(); ++i) {
            if (i) out += ", ";
            out += (*this)(s->args[i]);
         }
         return out + ")";
      }
      case ScalarNode::Kind::Agg: {
         std::string v = name(s->var);
         return s->name + "{" + v + "}(" + (*this)(s->body) + ")";
      }
   }
   return "?";
}

std::string Printer::operator()(const PredAtom& p) {
   std::string op = p.kind == PredAtom::Kind::Eq ? "=" : p.op;
   return "[" + (*this)(p.lhs) + " " + op + " " + (*this)(p.rhs) + "]";
}

std::string Printer::operator()(const Expr& e) {
   switch (e->kind) {
      case ExprNode::Kind::Zero: return "0";
      case ExprNode::Kind::One: return "1";
      case ExprNode::Kind::Add: return "(" + (*this)(e->a) + " + " + (*this)(e->b) + ")";
      case ExprNode::Kind::Mul: return (*this)(e->a) + " * " + (*this)(e->b);
      case ExprNode::Kind::Squash: return "||" + (*this)(e->a) + "||";
      case ExprNode::Kind::Not: return "not(" + (*this)(e->a) + ")";
      case ExprNode::Kind::Sum: {
         std::string v = name(e->var);
         return "sum[" + v + "](" + (*this)(e->a) + ")";
      }
      case ExprNode::Kind::Pred: return (*this)(e->pred);
      case ExprNode::Kind::Rel: return e->rel + "(" + name(e->var) + ")";
   }
   return "?";
}

std::string to_string(const Expr& e, PrintOptions opt) {
   Printer p(opt);
   return p(e);
}

std::string to_string(const Scalar& s, PrintOptions opt) {
   Printer p(opt);
   return p(s);
}

std::string to_string(const PredAtom& a, PrintOptions opt) {
   Printer p(opt);
   return p(a);
}

namespace {

// Bound variables renamed to b1, b2, ... in binding order; free ones keep their ids.
std::string canonical_agg(const Scalar& s) {
   std::map<int, TupleVar> free;
   collect_free(s, free);
   int counter = 0;
   std::map<int, int> bound_names;
   std::function<std::string(const Expr&)> ex;
   std::function<std::string(const Scalar&)> sc;
   auto vn = [&](const TupleVar& v) {
      auto it = bound_names.find(v.id);
      return it != bound_names.end() ? "b" + std::to_string(it->second) : var_name(v);
   };
   sc = [&](const Scalar& x) -> std::string {
      switch (x->kind) {
         case ScalarNode::Kind::Attr: return vn(x->var) + "." + std::to_string(x->column);
         case ScalarNode::Kind::Const: return "c:" + x->value;
         case ScalarNode::Kind::Func: {
            std::string out = x->name + "(";
            for (const auto& a : x->args) out += sc(a) + ",";
            return out + ")";
         }
         case ScalarNode::Kind::Agg: {
            bound_names[x->var.id] = ++counter;
            return x->name + "{" + vn(x->var) + "}(" + ex(x->body) + ")";
         }
      }
      return "?";
   };
   ex = [&](const Expr& e) -> std::string {
      switch (e->kind) {
         case ExprNode::Kind::Zero: return "0";
         case ExprNode::Kind::One: return "1";
         case ExprNode::Kind::Add: return "(" + ex(e->a) + "+" + ex(e->b) + ")";
         case ExprNode::Kind::Mul: return "(" + ex(e->a) + "*" + ex(e->b) + ")";
         case ExprNode::Kind::Squash: return "|" + ex(e->a) + "|";
         case ExprNode::Kind::Not: return "!" + ex(e->a);
         case ExprNode::Kind::Sum:
            bound_names[e->var.id] = ++counter;
            return "S{" + vn(e->var) + "}" + ex(e->a);
         case ExprNode::Kind::Pred:
            return "[" + sc(e->pred.lhs) + (e->pred.kind == PredAtom::Kind::Eq ? "=" : e->pred.op) + sc(e->pred.rhs) + "]";
         case ExprNode::Kind::Rel: return e->rel + "(" + vn(e->var) + ")";
      }
      return "?";
   };
   return sc(s);
}

} // namespace

} // namespace ueq

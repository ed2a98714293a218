#include "ueq/oracle.hpp"

#include <algorithm>
#include <random>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

std::uint64_t mix(std::uint64_t x) {
   x += 0x9e3779b97f4a7c15ULL;
   x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
   x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
   return x ^ (x >> 31);
}

std::uint64_t hash_string(const std::string& s) {
   std::uint64_t h = 1469598103934665603ULL;
   for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
   return h;
}

const Bag& empty_bag() {
   static const Bag b;
   return b;
}

} // namespace

const Bag& FiniteDb::rel(const std::string& name) const {
   auto it = relations.find(name);
   return it == relations.end() ? empty_bag() : it->second;
}

std::string dump_bag(const Bag& b) {
   std::string out;
   for (const auto& [t, m] : b) {
      if (m == 0) continue;
      out += "  (";
      for (std::size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + std::to_string(t[i]);
      out += ") x" + std::to_string(m) + "\n";
   }
   return out;
}

std::string FiniteDb::dump(const SchemaEnv* env) const {
   std::string out;
   for (const auto& [name, bag] : relations) {
      out += name;
      if (env)
         if (auto s = env->table(name)) {
            out += "(";
            for (std::size_t i = 0; i < s->size(); ++i)
               out += (i ? ", " : "") + (s->columns[i].type == BaseType::Opaque ? std::string("??") : s->columns[i].name);
            out += ")";
         }
      out += ":\n" + dump_bag(bag);
   }
   return out;
}

std::vector<Value> make_universe(int domain, const std::vector<Value>& extra) {
   std::vector<Value> u;
   for (int i = 0; i < domain; ++i) u.push_back(i);
   u.insert(u.end(), extra.begin(), extra.end());
   std::sort(u.begin(), u.end());
   u.erase(std::unique(u.begin(), u.end()), u.end());
   if (u.empty()) u.push_back(0);
   return u;
}

Value wrap(Value v, const std::vector<Value>& universe) {
   if (std::binary_search(universe.begin(), universe.end(), v)) return v;
   return universe[mix(static_cast<std::uint64_t>(v)) % universe.size()];
}

namespace {

Value raw_const(const std::string& literal, BaseType type) {
   switch (type) {
      case BaseType::Int: return std::stoll(literal);
      case BaseType::Bool: return literal == "true" || literal == "TRUE" ? 1 : 0;
      default: return static_cast<Value>((hash_string(literal) & 0xffffffffffULL) + 1000000);
   }
}

} // namespace

Value const_value(const std::string& literal, BaseType type, const std::vector<Value>& universe) {
   return wrap(raw_const(literal, type), universe);
}

Value apply_function(const std::string& name, const std::vector<Value>& args, const std::vector<Value>& universe) {
   if (args.size() == 2 && name.size() == 1) {
      const Value a = args[0], b = args[1];
      switch (name[0]) {
         case '+': return wrap(a + b, universe);
         case '-': return wrap(a - b, universe);
         case '*': return wrap(a * b, universe);
         case '/': return wrap(b == 0 ? 0 : a / b, universe);
         default: break;
      }
   }
   std::uint64_t h = hash_string(name);
   for (Value a : args) h = mix(h ^ static_cast<std::uint64_t>(a));
   return universe[h % universe.size()];
}

namespace {

void query_consts(const QueryAst& q, std::vector<Value>& out);

void scalar_consts(const ScalarAst& s, std::vector<Value>& out) {
   if (s.kind == ScalarAst::Kind::Const) out.push_back(raw_const(s.literal, s.literal_type));
   for (const auto& a : s.args) scalar_consts(*a, out);
   if (s.sub) query_consts(*s.sub, out);
}

void pred_consts(const PredAst& p, std::vector<Value>& out) {
   if (p.lhs) scalar_consts(*p.lhs, out);
   if (p.rhs) scalar_consts(*p.rhs, out);
   if (p.left) pred_consts(*p.left, out);
   if (p.right) pred_consts(*p.right, out);
   if (p.sub) query_consts(*p.sub, out);
}

void query_consts(const QueryAst& q, std::vector<Value>& out) {
   for (const auto& p : q.projections)
      if (p.expr) scalar_consts(*p.expr, out);
   for (const auto& f : q.from) query_consts(*f.source, out);
   if (q.where) pred_consts(*q.where, out);
   for (const auto& g : q.group_by) scalar_consts(*g, out);
   if (q.left) query_consts(*q.left, out);
   if (q.right) query_consts(*q.right, out);
}

} // namespace

std::vector<Value> query_constants(const QueryAst& q) {
   std::vector<Value> out;
   query_consts(q, out);
   std::sort(out.begin(), out.end());
   out.erase(std::unique(out.begin(), out.end()), out.end());
   return out;
}

// ---- U-expression evaluation ----

std::vector<Tuple> tuple_space(std::size_t width, const std::vector<Value>& universe, const EvalOptions& opt) {
   double size = 1;
   for (std::size_t i = 0; i < width; ++i) size *= static_cast<double>(universe.size());
   if (size > static_cast<double>(opt.max_tuple_space)) throw OracleLimit("tuple space too large");
   std::vector<Tuple> out;
   Tuple cur(width);
   std::vector<std::size_t> idx(width, 0);
   for (;;) {
      for (std::size_t i = 0; i < width; ++i) cur[i] = universe[idx[i]];
      out.push_back(cur);
      std::size_t k = 0;
      while (k < width && ++idx[k] == universe.size()) idx[k++] = 0;
      if (k == width) break;
   }
   return out;
}

namespace {

/// A relation atom over `id` that is a factor of `e`: every other tuple contributes zero.
const std::string* support_of(const Expr& e, int id) {
   switch (e->kind) {
      case ExprNode::Kind::Rel: return e->var.id == id ? &e->rel : nullptr;
      case ExprNode::Kind::Mul: {
         if (auto r = support_of(e->a, id)) return r;
         return support_of(e->b, id);
      }
      case ExprNode::Kind::Sum: return e->var.id == id ? nullptr : support_of(e->a, id);
      case ExprNode::Kind::Squash: return support_of(e->a, id);
      default: return nullptr;
   }
}

struct Evaluator {
   const FiniteDb& db;
   Binding& b;
   const EvalOptions& opt;

   template <class F>
   void for_each_tuple(const TupleVar& v, const Expr& body, F&& f) {
      const std::size_t width = v.schema->size();
      if (const std::string* r = support_of(body, v.id)) {
         for (const auto& [t, m] : db.rel(*r))
            if (m != 0 && t.size() == width) f(t);
         return;
      }
      for (const auto& t : tuple_space(width, db.universe, opt)) f(t);
   }

   template <class F>
   void bind(const TupleVar& v, const Expr& body, F&& f) {
      auto saved = b.find(v.id) == b.end() ? std::optional<Tuple>() : std::optional<Tuple>(b[v.id]);
      for_each_tuple(v, body, [&](const Tuple& t) {
         b[v.id] = t;
         f(t);
      });
      if (saved)
         b[v.id] = *saved;
      else
         b.erase(v.id);
   }

   std::int64_t expr(const Expr& e) {
      switch (e->kind) {
         case ExprNode::Kind::Zero: return 0;
         case ExprNode::Kind::One: return 1;
         case ExprNode::Kind::Add: return expr(e->a) + expr(e->b);
         case ExprNode::Kind::Mul: {
            std::int64_t x = expr(e->a);
            return x == 0 ? 0 : x * expr(e->b);
         }
         case ExprNode::Kind::Squash: return expr(e->a) != 0 ? 1 : 0;
         case ExprNode::Kind::Not: return expr(e->a) == 0 ? 1 : 0;
         case ExprNode::Kind::Sum: {
            std::int64_t total = 0;
            bind(e->var, e->a, [&](const Tuple&) { total += expr(e->a); });
            return total;
         }
         case ExprNode::Kind::Pred: return pred(e->pred) ? 1 : 0;
         case ExprNode::Kind::Rel: {
            const Bag& r = db.rel(e->rel);
            auto it = r.find(lookup(e->var));
            return it == r.end() ? 0 : it->second;
         }
      }
      return 0;
   }

   const Tuple& lookup(const TupleVar& v) {
      auto it = b.find(v.id);
      if (it == b.end()) throw std::runtime_error("unbound variable " + var_name(v));
      return it->second;
   }

   Value scalar(const Scalar& s) {
      switch (s->kind) {
         case ScalarNode::Kind::Attr: return lookup(s->var).at(s->column);
         case ScalarNode::Kind::Const: return const_value(s->value, s->type, db.universe);
         case ScalarNode::Kind::Func: {
            std::vector<Value> args;
            for (const auto& a : s->args) args.push_back(scalar(a));
            return apply_function(s->name, args, db.universe);
         }
         case ScalarNode::Kind::Agg: {
            std::vector<std::pair<Value, std::int64_t>> rows;
            bind(s->var, s->body, [&](const Tuple& t) {
               std::int64_t m = expr(s->body);
               if (m != 0) rows.emplace_back(t.empty() ? 0 : t[0], m);
            });
            return aggregate_value(s->name, rows, db.universe);
         }
      }
      return 0;
   }

   bool pred(const PredAtom& p) {
      Value l = scalar(p.lhs), r = scalar(p.rhs);
      if (p.kind == PredAtom::Kind::Eq) return l == r;
      return p.op == ">" ? l > r : l >= r;
   }

   static Value aggregate_value(const std::string& name, const std::vector<std::pair<Value, std::int64_t>>& rows,
                                const std::vector<Value>& universe) {
      std::int64_t count = 0;
      Value sum = 0;
      for (const auto& [v, m] : rows) {
         count += m;
         sum += v * m;
      }
      Value out = 0;
      if (name == "count") {
         out = count;
      } else if (name == "sum" || name == "agg") {
         out = sum;
      } else if (name == "avg") {
         out = count == 0 ? 0 : sum / count;
      } else if (name == "min" || name == "max") {
         for (std::size_t i = 0; i < rows.size(); ++i)
            if (i == 0 || (name == "min" ? rows[i].first < out : rows[i].first > out)) out = rows[i].first;
      } else {
         std::vector<Value> args;
         for (const auto& [v, m] : rows)
            for (std::int64_t k = 0; k < m; ++k) args.push_back(v);
         return apply_function(name, args, universe);
      }
      return wrap(out, universe);
   }
};

} // namespace

std::int64_t eval_uexp(const Expr& e, const FiniteDb& db, Binding& binding, const EvalOptions& opt) {
   return Evaluator{db, binding, opt}.expr(e);
}

Value eval_scalar(const Scalar& s, const FiniteDb& db, Binding& binding, const EvalOptions& opt) {
   return Evaluator{db, binding, opt}.scalar(s);
}

bool eval_pred(const PredAtom& p, const FiniteDb& db, Binding& binding, const EvalOptions& opt) {
   return Evaluator{db, binding, opt}.pred(p);
}

bool denotation_agrees(const Expr& e, const TupleVar& out, const Bag& expected, const FiniteDb& db,
                       const EvalOptions& opt) {
   Binding b;
   auto check = [&](const Tuple& t) {
      b[out.id] = t;
      auto it = expected.find(t);
      std::int64_t want = it == expected.end() ? 0 : it->second;
      return eval_uexp(e, db, b, opt) == want;
   };
   std::vector<Tuple> points;
   try {
      points = tuple_space(out.schema->size(), db.universe, opt);
   } catch (const OracleLimit&) {
      for (const auto& [t, m] : expected) points.push_back(t);
   }
   for (const auto& t : points)
      if (!check(t)) return false;
   for (const auto& [t, m] : expected)
      if (m != 0 && !check(t)) return false;
   return true;
}

// ---- SQL interpreter ----

namespace {

struct Row {
   std::vector<Tuple> tuples;
   std::int64_t mult = 1;
};

struct Frame {
   ScopeFrame scope;
   std::vector<Tuple> tuples;
   const Frame* parent = nullptr;
   /// Rows of the current group, for aggregates inside a grouped SELECT.
   const std::vector<Row>* group = nullptr;
};

struct Interpreter {
   const SchemaEnv& env;
   const FiniteDb& db;

   Bag query(const QueryAst& q, const Frame* outer) {
      switch (q.kind) {
         case QueryAst::Kind::Table: {
            if (env.is_view(q.table)) return query(*env.views.at(q.table), nullptr);
            return db.rel(q.table);
         }
         case QueryAst::Kind::Distinct: {
            Bag b = query(*q.left, outer);
            for (auto& [t, m] : b) m = m != 0 ? 1 : 0;
            return b;
         }
         case QueryAst::Kind::UnionAll: {
            Bag a = query(*q.left, outer);
            for (const auto& [t, m] : query(*q.right, outer)) a[t] += m;
            return a;
         }
         case QueryAst::Kind::Except: {
            Bag a = query(*q.left, outer);
            Bag b = query(*q.right, outer);
            for (auto& [t, m] : a)
               if (auto it = b.find(t); it != b.end() && it->second != 0) m = 0;
            return a;
         }
         case QueryAst::Kind::Select: return select(q, outer);
      }
      return {};
   }

   Bag select(const QueryAst& q, const Frame* outer) {
      Frame f;
      f.parent = outer;
      f.scope.parent = outer ? &outer->scope : nullptr;
      std::vector<Bag> sources;
      for (const auto& item : q.from) {
         sources.push_back(query(*item.source, outer));
         f.scope.aliases.emplace_back(item.alias, source_schema(*item.source, env, outer ? &outer->scope : nullptr));
      }
      f.tuples.resize(q.from.size());

      std::vector<Row> rows;
      std::vector<std::pair<const Tuple*, std::int64_t>> pick(q.from.size());
      std::function<void(std::size_t, std::int64_t)> loop = [&](std::size_t i, std::int64_t m) {
         if (i == q.from.size()) {
            for (std::size_t k = 0; k < i; ++k) f.tuples[k] = *pick[k].first;
            if (q.where && !pred(*q.where, f)) return;
            rows.push_back({f.tuples, m});
            return;
         }
         for (const auto& [t, mm] : sources[i]) {
            if (mm == 0) continue;
            pick[i] = {&t, mm};
            loop(i + 1, m * mm);
         }
      };
      loop(0, 1);

      Bag out;
      for (const auto& row : rows) {
         f.tuples = row.tuples;
         std::vector<Row> group;
         if (!q.group_by.empty()) {
            Frame g = f;
            auto key = group_key(q, f);
            for (const auto& other : rows) {
               g.tuples = other.tuples;
               if (group_key(q, g) == key) group.push_back(other);
            }
            f.group = &group;
         }
         Tuple t;
         for (const auto& p : q.projections) {
            switch (p.kind) {
               case Projection::Kind::Star:
                  for (const auto& x : f.tuples) t.insert(t.end(), x.begin(), x.end());
                  break;
               case Projection::Kind::AliasStar:
                  for (std::size_t i = 0; i < q.from.size(); ++i)
                     if (q.from[i].alias == p.alias) t.insert(t.end(), f.tuples[i].begin(), f.tuples[i].end());
                  break;
               case Projection::Kind::Expr: t.push_back(scalar(*p.expr, f)); break;
            }
         }
         f.group = nullptr;
         out[t] += row.mult;
      }
      if (q.distinct)
         for (auto& [t, m] : out) m = m != 0 ? 1 : 0;
      return out;
   }

   std::vector<Value> group_key(const QueryAst& q, const Frame& f) {
      std::vector<Value> key;
      for (const auto& g : q.group_by) key.push_back(scalar(*g, f));
      return key;
   }

   Value scalar(const ScalarAst& s, const Frame& f) {
      switch (s.kind) {
         case ScalarAst::Kind::Attr: {
            auto r = resolve_attr(s, &f.scope);
            const Frame* cur = &f;
            for (int d = 0; d < r.depth; ++d) cur = cur->parent;
            for (std::size_t i = 0; i < cur->scope.aliases.size(); ++i) {
               if (cur->scope.aliases[i].first != r.alias) continue;
               const Tuple& t = cur->tuples[i];
               if (r.column) return t.at(*r.column);
               return apply_function("." + s.attr, {t.at(*r.schema->opaque_column())}, db.universe);
            }
            throw SemanticError("unbound alias " + r.alias);
         }
         case ScalarAst::Kind::Const: return const_value(s.literal, s.literal_type, db.universe);
         case ScalarAst::Kind::Func: {
            std::vector<Value> args;
            for (const auto& a : s.args) args.push_back(scalar(*a, f));
            return apply_function(s.name, args, db.universe);
         }
         case ScalarAst::Kind::Agg: {
            std::vector<std::pair<Value, std::int64_t>> rows;
            if (s.sub) {
               for (const auto& [t, m] : query(*s.sub, &f))
                  if (m != 0) rows.emplace_back(t.empty() ? 0 : t[0], m);
            } else {
               if (!f.group) throw SemanticError("aggregate outside a GROUP BY query", s.pos);
               Frame g = f;
               g.group = nullptr;
               for (const auto& row : *f.group) {
                  g.tuples = row.tuples;
                  Value v = s.star || s.args.empty() ? 0 : scalar(*s.args[0], g);
                  if (s.star) {
                     // `SELECT *` over the group: the first column of the concatenated row
                     Tuple all;
                     for (const auto& x : row.tuples) all.insert(all.end(), x.begin(), x.end());
                     v = all.empty() ? 0 : all[0];
                  }
                  rows.emplace_back(v, row.mult);
               }
            }
            return Evaluator::aggregate_value(s.name, rows, db.universe);
         }
      }
      return 0;
   }

   bool pred(const PredAst& p, const Frame& f) {
      switch (p.kind) {
         case PredAst::Kind::True: return true;
         case PredAst::Kind::False: return false;
         case PredAst::Kind::And: return pred(*p.left, f) && pred(*p.right, f);
         case PredAst::Kind::Or: return pred(*p.left, f) || pred(*p.right, f);
         case PredAst::Kind::Not: return !pred(*p.left, f);
         case PredAst::Kind::Exists: {
            for (const auto& [t, m] : query(*p.sub, &f))
               if (m != 0) return true;
            return false;
         }
         case PredAst::Kind::Cmp: {
            Value l = scalar(*p.lhs, f), r = scalar(*p.rhs, f);
            if (p.op == "=") return l == r;
            if (p.op == "<>" || p.op == "!=") return l != r;
            if (p.op == "<") return l < r;
            if (p.op == "<=") return l <= r;
            if (p.op == ">") return l > r;
            if (p.op == ">=") return l >= r;
            throw SemanticError("unknown comparison " + p.op, p.pos);
         }
      }
      return false;
   }
};

void prune(Bag& b) {
   for (auto it = b.begin(); it != b.end();) it = it->second == 0 ? b.erase(it) : std::next(it);
}

} // namespace

Bag eval_query(const QueryAst& q, const SchemaEnv& env, const FiniteDb& db) {
   Bag b = Interpreter{env, db}.query(q, nullptr);
   prune(b);
   return b;
}

// ---- constraints and generation ----

bool check_constraints(const FiniteDb& db, const SchemaEnv& env) {
   for (const auto& key : env.keys) {
      std::map<Tuple, std::int64_t> per_key;
      for (const auto& [t, m] : db.rel(key.table)) {
         if (m == 0) continue;
         Tuple k;
         for (auto c : key.columns) k.push_back(t.at(c));
         if ((per_key[k] += m) > 1) return false;
      }
   }
   for (const auto& fk : env.foreign_keys) {
      for (const auto& [s, m] : db.rel(fk.source)) {
         if (m == 0) continue;
         std::int64_t matched = 0;
         for (const auto& [t, n] : db.rel(fk.target)) {
            bool eq = true;
            for (std::size_t c = 0; c < fk.target_columns.size() && eq; ++c)
               eq = t.at(fk.target_columns[c]) == s.at(fk.source_columns[c]);
            if (eq) matched += n;
         }
         if (matched != 1) return false;
      }
   }
   return true;
}

namespace {

std::vector<std::string> relations_of(const SchemaEnv& env, const GenOptions& opt) {
   return opt.relations.empty() ? env.table_order : opt.relations;
}

bool keyed(const SchemaEnv& env, const std::string& rel) {
   return !env.keys_of(rel).empty();
}

bool within_limits(const FiniteDb& db, const GenOptions& opt) {
   for (const auto& [_, bag] : db.relations) {
      int n = 0;
      for (const auto& [t, m] : bag) n += m != 0;
      if (n > opt.max_tuples || n < opt.min_tuples) return false;
   }
   return true;
}

} // namespace

GenResult gen_instances(const SchemaEnv& env, const GenOptions& opt, std::size_t count) {
   GenResult out;
   std::mt19937_64 rng(opt.seed);
   const auto universe = make_universe(opt.domain, opt.extra_values);
   const auto rels = relations_of(env, opt);
   auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
   std::size_t failures = 0;
   while (out.dbs.size() < count) {
      FiniteDb db;
      db.universe = universe;
      for (const auto& name : rels) {
         auto schema = env.table(name);
         if (!schema) continue;
         Bag& bag = db.relations[name];
         int n = pick(opt.min_tuples, std::max(opt.min_tuples, opt.max_tuples));
         const bool has_key = keyed(env, name);
         for (int i = 0; i < n; ++i) {
            Tuple t(schema->size());
            for (auto& v : t) v = universe[static_cast<std::size_t>(pick(0, static_cast<int>(universe.size()) - 1))];
            if (has_key) {
               bag[t] = 1;
            } else {
               bag[t] += pick(1, opt.max_mult);
               bag[t] = std::min<std::int64_t>(bag[t], opt.max_mult);
            }
         }
      }
      // repair keys by dropping clashing tuples, then foreign keys by adding targets
      for (const auto& key : env.keys) {
         std::set<Tuple> seen;
         Bag& bag = db.relations[key.table];
         for (auto it = bag.begin(); it != bag.end();) {
            Tuple k;
            for (auto c : key.columns) k.push_back(it->first.at(c));
            it = seen.insert(k).second ? std::next(it) : bag.erase(it);
         }
      }
      for (int pass = 0; pass < 3; ++pass)
         for (const auto& fk : env.foreign_keys) {
            auto target = env.table(fk.target);
            Bag& tb = db.relations[fk.target];
            for (const auto& [s, m] : Bag(db.rel(fk.source))) {
               bool found = false;
               for (const auto& [t, n] : tb) {
                  bool eq = true;
                  for (std::size_t c = 0; c < fk.target_columns.size() && eq; ++c)
                     eq = t.at(fk.target_columns[c]) == s.at(fk.source_columns[c]);
                  found = found || eq;
               }
               if (found) continue;
               Tuple t(target->size());
               for (auto& v : t) v = universe[static_cast<std::size_t>(pick(0, static_cast<int>(universe.size()) - 1))];
               for (std::size_t c = 0; c < fk.target_columns.size(); ++c) t[fk.target_columns[c]] = s.at(fk.source_columns[c]);
               tb[t] = 1;
            }
         }
      if (check_constraints(db, env) && within_limits(db, opt)) {
         out.dbs.push_back(std::move(db));
         failures = 0;
      } else if (++failures > static_cast<std::size_t>(opt.attempts_per_db) * (out.dbs.empty() ? 4 : 1)) {
         if (out.dbs.empty()) out.diagnostic = "no database satisfies the constraints within the size limits";
         else out.diagnostic = "generation stopped after repeated constraint violations";
         break;
      }
   }
   return out;
}

GenResult enumerate_instances(const SchemaEnv& env, const GenOptions& opt, std::size_t cap) {
   GenResult out;
   const auto universe = make_universe(opt.domain, opt.extra_values);
   const auto rels = relations_of(env, opt);
   std::vector<std::vector<Bag>> choices;
   for (const auto& name : rels) {
      auto schema = env.table(name);
      auto space = tuple_space(schema->size(), universe);
      const int max_mult = keyed(env, name) ? 1 : opt.max_mult;
      std::vector<Bag> bags;
      Bag cur;
      std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
         if (bags.size() > cap) return;
         if (i == space.size()) {
            if (used >= opt.min_tuples) bags.push_back(cur);
            return;
         }
         rec(i + 1, used);
         if (used == opt.max_tuples) return;
         for (int m = 1; m <= max_mult; ++m) {
            cur[space[i]] = m;
            rec(i + 1, used + 1);
         }
         cur.erase(space[i]);
      };
      rec(0, 0);
      choices.push_back(std::move(bags));
   }
   double total = 1;
   for (const auto& c : choices) total *= static_cast<double>(c.size());
   if (total > static_cast<double>(cap)) {
      out.diagnostic = "too many databases to enumerate";
      return out;
   }
   if (total == 0) {
      out.diagnostic = "no database satisfies the constraints within the size limits";
      return out;
   }
   std::vector<std::size_t> idx(choices.size(), 0);
   for (;;) {
      FiniteDb db;
      db.universe = universe;
      for (std::size_t i = 0; i < choices.size(); ++i)
         if (!choices[i].empty()) db.relations[rels[i]] = choices[i][idx[i]];
      if (check_constraints(db, env)) out.dbs.push_back(std::move(db));
      std::size_t k = 0;
      while (k < choices.size() && ++idx[k] >= choices[k].size()) idx[k++] = 0;
      if (k == choices.size()) break;
   }
   if (out.dbs.empty()) out.diagnostic = "no database satisfies the constraints within the size limits";
   return out;
}

// ---- differential kernels ----

DiffResult differential_serial(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env,
                               const std::vector<FiniteDb>& dbs) {
   DiffResult r;
   for (std::size_t i = 0; i < dbs.size(); ++i) {
      if (eval_query(q1, env, dbs[i]) == eval_query(q2, env, dbs[i])) continue;
      ++r.disagreements;
      if (!r.first) r.first = i;
   }
   return r;
}

DiffResult differential_parallel(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env,
                                 const std::vector<FiniteDb>& dbs) {
   const long n = static_cast<long>(dbs.size());
   std::size_t count = 0;
   long first = n;
   bool failed = false;
   std::string error;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : count) reduction(min : first)
   for (long i = 0; i < n; ++i) {
      try {
         if (eval_query(q1, env, dbs[static_cast<std::size_t>(i)]) != eval_query(q2, env, dbs[static_cast<std::size_t>(i)])) {
            ++count;
            first = std::min(first, i);
         }
      } catch (const std::exception& e) {
#pragma omp critical(ueq_diff_error)
         {
            failed = true;
            error = e.what();
         }
      }
   }
   if (failed) throw OracleLimit(error);
   DiffResult r;
   r.disagreements = count;
   if (first < n) r.first = static_cast<std::size_t>(first);
   return r;
}

} // namespace ueq

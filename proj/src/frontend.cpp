#include "ueq/frontend.hpp"

#include <algorithm>
#include <functional>

#include "ueq/errors.hpp"

namespace ueq {

SchemaPtr SchemaEnv::table(const std::string& name) const {
   auto it = tables.find(name);
   return it == tables.end() ? nullptr : it->second;
}

std::vector<const KeyDecl*> SchemaEnv::keys_of(const std::string& t) const {
   std::vector<const KeyDecl*> out;
   for (const auto& k : keys)
      if (k.table == t) out.push_back(&k);
   return out;
}

bool union_compatible(const Schema& a, const Schema& b) {
   if (a.size() != b.size()) return false;
   for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& ca = a.columns[i];
      const auto& cb = b.columns[i];
      if ((ca.type == BaseType::Opaque) != (cb.type == BaseType::Opaque)) return false;
      if (ca.type == BaseType::Opaque && ca.opaque_origin != cb.opaque_origin) return false;
      if (!types_compatible(ca.type, cb.type)) return false;
   }
   return true;
}

ResolvedAttr resolve_attr(const ScalarAst& attr, const ScopeFrame* scope) {
   int depth = 0;
   if (!attr.alias.empty()) {
      for (const ScopeFrame* f = scope; f; f = f->parent, ++depth) {
         for (const auto& [alias, schema] : f->aliases) {
            if (alias != attr.alias) continue;
            auto cols = schema->find_all(attr.attr);
            if (cols.size() > 1) throw SemanticError("ambiguous attribute " + attr.alias + "." + attr.attr, attr.pos);
            if (cols.size() == 1) return {alias, schema, cols[0], depth};
            if (schema->generic()) return {alias, schema, std::nullopt, depth};
            throw SemanticError("unknown attribute " + attr.alias + "." + attr.attr + " in " + describe(*schema), attr.pos);
         }
      }
      throw SemanticError("unknown alias " + attr.alias, attr.pos);
   }
   for (const ScopeFrame* f = scope; f; f = f->parent, ++depth) {
      std::optional<ResolvedAttr> found;
      for (const auto& [alias, schema] : f->aliases) {
         auto cols = schema->find_all(attr.attr);
         if (cols.empty()) continue;
         if (cols.size() > 1 || found) throw SemanticError("ambiguous attribute " + attr.attr, attr.pos);
         found = ResolvedAttr{alias, schema, cols[0], depth};
      }
      if (found) return *found;
   }
   if (scope && scope->aliases.size() == 1 && scope->aliases[0].second->generic())
      return {scope->aliases[0].first, scope->aliases[0].second, std::nullopt, 0};
   throw SemanticError("unknown attribute " + attr.attr, attr.pos);
}

namespace {

void check_pred(const PredAst& p, const SchemaEnv& env, const ScopeFrame* scope);

BaseType agg_type(const ScalarAst& s, const SchemaEnv& env, const ScopeFrame* scope) {
   if (s.name == "count") return BaseType::Int;
   if (s.name == "sum" || s.name == "avg") return BaseType::Int;
   if (s.name == "agg") return BaseType::Any;
   if (s.sub) {
      auto sch = infer_schema(*s.sub, env, scope);
      return sch->size() ? sch->columns[0].type : BaseType::Any;
   }
   if (!s.args.empty()) return infer_type(*s.args[0], env, scope);
   return BaseType::Any;
}

} // namespace

BaseType infer_type(const ScalarAst& s, const SchemaEnv& env, const ScopeFrame* scope) {
   switch (s.kind) {
      case ScalarAst::Kind::Attr: {
         auto r = resolve_attr(s, scope);
         if (!r.column) return BaseType::Any;
         auto t = r.schema->columns[*r.column].type;
         return t == BaseType::Opaque ? BaseType::Any : t;
      }
      case ScalarAst::Kind::Const: return s.literal_type;
      case ScalarAst::Kind::Func:
         for (const auto& a : s.args) infer_type(*a, env, scope);
         if (s.name == "+" || s.name == "-" || s.name == "*" || s.name == "/") return BaseType::Int;
         return BaseType::Any;
      case ScalarAst::Kind::Agg:
         if (s.sub) {
            auto sch = infer_schema(*s.sub, env, scope);
            if (s.name != "count" && sch->size() == 0) throw SemanticError("aggregate over an empty schema", s.pos);
         } else if (!s.args.empty()) {
            infer_type(*s.args[0], env, scope);
         }
         return agg_type(s, env, scope);
   }
   return BaseType::Any;
}

namespace {

void check_pred(const PredAst& p, const SchemaEnv& env, const ScopeFrame* scope) {
   switch (p.kind) {
      case PredAst::Kind::True:
      case PredAst::Kind::False: return;
      case PredAst::Kind::Cmp: {
         auto lt = infer_type(*p.lhs, env, scope);
         auto rt = infer_type(*p.rhs, env, scope);
         if (!types_compatible(lt, rt))
            throw SemanticError("cannot compare " + std::string(to_string(lt)) + " with " + std::string(to_string(rt)), p.pos);
         return;
      }
      case PredAst::Kind::And:
      case PredAst::Kind::Or:
         check_pred(*p.left, env, scope);
         check_pred(*p.right, env, scope);
         return;
      case PredAst::Kind::Not: check_pred(*p.left, env, scope); return;
      case PredAst::Kind::Exists: infer_schema(*p.sub, env, scope); return;
   }
}

bool contains_agg(const ScalarAst& s) {
   if (s.kind == ScalarAst::Kind::Agg) return true;
   for (const auto& a : s.args)
      if (contains_agg(*a)) return true;
   return false;
}

void check_no_scalar_agg(const ScalarAst& s) {
   if (s.kind == ScalarAst::Kind::Agg && !s.sub)
      throw SemanticError("aggregate " + s.name + " over a scalar needs GROUP BY", s.pos);
   for (const auto& a : s.args) check_no_scalar_agg(*a);
}

} // namespace

SchemaPtr source_schema(const QueryAst& source, const SchemaEnv& env, const ScopeFrame* scope) {
   if (source.kind == QueryAst::Kind::Table) {
      if (auto t = env.table(source.table)) return t;
      auto v = env.views.find(source.table);
      if (v != env.views.end()) {
         auto s = std::make_shared<Schema>(*infer_schema(*v->second, env, nullptr));
         s->name = source.table;
         return s;
      }
      throw SemanticError("undeclared table or view " + source.table, source.pos);
   }
   return infer_schema(source, env, scope);
}

SchemaPtr infer_schema(const QueryAst& q, const SchemaEnv& env, const ScopeFrame* scope) {
   switch (q.kind) {
      case QueryAst::Kind::Table: return source_schema(q, env, scope);
      case QueryAst::Kind::Distinct: return infer_schema(*q.left, env, scope);
      case QueryAst::Kind::UnionAll:
      case QueryAst::Kind::Except: {
         auto l = infer_schema(*q.left, env, scope);
         auto r = infer_schema(*q.right, env, scope);
         if (!union_compatible(*l, *r))
            throw SemanticError("incompatible schemas " + describe(*l) + " and " + describe(*r), q.pos);
         return l;
      }
      case QueryAst::Kind::Select: break;
   }
   ScopeFrame frame;
   frame.parent = scope;
   for (const auto& item : q.from) {
      for (const auto& [alias, _] : frame.aliases)
         if (alias == item.alias) throw SemanticError("duplicate alias " + item.alias, item.pos);
      frame.aliases.emplace_back(item.alias, source_schema(*item.source, env, scope));
   }
   if (q.where) check_pred(*q.where, env, &frame);
   for (const auto& g : q.group_by) {
      if (contains_agg(*g)) throw SemanticError("aggregate in GROUP BY", g->pos);
      infer_type(*g, env, &frame);
   }
   auto out = std::make_shared<Schema>();
   for (std::size_t i = 0; i < q.projections.size(); ++i) {
      const auto& p = q.projections[i];
      switch (p.kind) {
         case Projection::Kind::Star:
            if (!q.group_by.empty()) throw SemanticError("* in a grouped query", p.pos);
            for (const auto& [_, s] : frame.aliases) out->columns.insert(out->columns.end(), s->columns.begin(), s->columns.end());
            break;
         case Projection::Kind::AliasStar: {
            if (!q.group_by.empty()) throw SemanticError("* in a grouped query", p.pos);
            auto it = std::find_if(frame.aliases.begin(), frame.aliases.end(), [&](const auto& a) { return a.first == p.alias; });
            if (it == frame.aliases.end()) throw SemanticError("unknown alias " + p.alias, p.pos);
            out->columns.insert(out->columns.end(), it->second->columns.begin(), it->second->columns.end());
            break;
         }
         case Projection::Kind::Expr: {
            if (q.group_by.empty()) check_no_scalar_agg(*p.expr);
            Column c;
            c.type = infer_type(*p.expr, env, &frame);
            if (!p.as.empty())
               c.name = p.as;
            else if (p.expr->kind == ScalarAst::Kind::Attr)
               c.name = p.expr->attr;
            else
               c.name = "col" + std::to_string(i + 1);
            out->columns.push_back(c);
            break;
         }
      }
   }
   return out;
}

// ---- GROUP BY ----

namespace {

void rename_aliases(ScalarAst& s, const std::map<std::string, std::string>& names);
void rename_aliases(PredAst& p, const std::map<std::string, std::string>& names);

// Renames free alias references; subqueries shadowing an alias stop the renaming for it.
void rename_aliases(QueryAst& q, std::map<std::string, std::string> names) {
   switch (q.kind) {
      case QueryAst::Kind::Table: return;
      case QueryAst::Kind::Distinct: rename_aliases(*q.left, names); return;
      case QueryAst::Kind::UnionAll:
      case QueryAst::Kind::Except:
         rename_aliases(*q.left, names);
         rename_aliases(*q.right, names);
         return;
      case QueryAst::Kind::Select: break;
   }
   for (auto& f : q.from) rename_aliases(*f.source, names);
   for (const auto& f : q.from) names.erase(f.alias);
   for (auto& p : q.projections) {
      if (p.expr) rename_aliases(*p.expr, names);
      if (p.kind == Projection::Kind::AliasStar && names.count(p.alias)) p.alias = names.at(p.alias);
   }
   if (q.where) rename_aliases(*q.where, names);
   for (auto& g : q.group_by) rename_aliases(*g, names);
}

void rename_aliases(ScalarAst& s, const std::map<std::string, std::string>& names) {
   if (s.kind == ScalarAst::Kind::Attr) {
      auto it = names.find(s.alias);
      if (it != names.end()) s.alias = it->second;
   }
   for (auto& a : s.args) rename_aliases(*a, names);
   if (s.sub) rename_aliases(*s.sub, names);
}

void rename_aliases(PredAst& p, const std::map<std::string, std::string>& names) {
   if (p.lhs) rename_aliases(*p.lhs, names);
   if (p.rhs) rename_aliases(*p.rhs, names);
   if (p.left) rename_aliases(*p.left, names);
   if (p.right) rename_aliases(*p.right, names);
   if (p.sub) rename_aliases(*p.sub, names);
}

bool same_scalar(const ScalarAst& a, const ScalarAst& b) {
   return to_sql(a) == to_sql(b);
}

void collect_attrs(const ScalarAst& s, std::vector<const ScalarAst*>& out) {
   if (s.kind == ScalarAst::Kind::Attr) out.push_back(&s);
   if (s.kind == ScalarAst::Kind::Agg) return;
   for (const auto& a : s.args) collect_attrs(*a, out);
}

QueryPtr desugar_rec(const QueryPtr& q);

void desugar_scalar(ScalarAstPtr& s) {
   if (!s) return;
   for (auto& a : s->args) desugar_scalar(a);
   if (s->sub) s->sub = desugar_rec(s->sub);
}

void desugar_pred(PredAstPtr& p) {
   if (!p) return;
   desugar_scalar(p->lhs);
   desugar_scalar(p->rhs);
   desugar_pred(p->left);
   desugar_pred(p->right);
   if (p->sub) p->sub = desugar_rec(p->sub);
}

QueryPtr desugar_rec(const QueryPtr& q) {
   if (!q) return q;
   if (q->kind == QueryAst::Kind::Table) return q;
   if (q->kind != QueryAst::Kind::Select) {
      q->left = desugar_rec(q->left);
      q->right = desugar_rec(q->right);
      return q;
   }
   for (auto& f : q->from) f.source = desugar_rec(f.source);
   desugar_pred(q->where);
   for (auto& p : q->projections) desugar_scalar(p.expr);
   if (q->group_by.empty()) return q;

   std::set<std::string> taken;
   for (const auto& f : q->from) taken.insert(f.alias);
   std::map<std::string, std::string> outer_names;
   for (const auto& f : q->from) {
      std::string n = "g_" + f.alias;
      while (taken.count(n)) n = "g_" + n;
      taken.insert(n);
      outer_names[f.alias] = n;
   }
   for (const auto& g : q->group_by)
      if (g->kind == ScalarAst::Kind::Attr && g->alias.empty())
         throw SemanticError("grouped attribute " + g->attr + " must be qualified", g->pos);

   PredAstPtr correlation;
   for (const auto& g : q->group_by) {
      auto outer = clone(g);
      rename_aliases(*outer, outer_names);
      correlation = make_and(correlation, make_cmp("=", clone(g), outer));
   }

   auto outer = std::make_shared<QueryAst>();
   outer->kind = QueryAst::Kind::Select;
   outer->pos = q->pos;
   outer->distinct = q->distinct;
   for (const auto& f : q->from) outer->from.push_back({clone(f.source), outer_names.at(f.alias), f.pos});
   if (q->where) {
      outer->where = clone(q->where);
      rename_aliases(*outer->where, outer_names);
   }

   std::function<ScalarAstPtr(const ScalarAstPtr&)> rewrite = [&](const ScalarAstPtr& s) -> ScalarAstPtr {
      if (s->kind == ScalarAst::Kind::Agg && !s->sub) {
         auto sub = std::make_shared<QueryAst>();
         sub->kind = QueryAst::Kind::Select;
         sub->pos = s->pos;
         for (const auto& f : q->from) sub->from.push_back({clone(f.source), f.alias, f.pos});
         sub->where = make_and(clone(q->where), clone(correlation));
         Projection p;
         p.pos = s->pos;
         if (s->star) {
            p.kind = Projection::Kind::Star;
         } else {
            p.kind = Projection::Kind::Expr;
            p.expr = clone(s->args.at(0));
            p.as = p.expr->kind == ScalarAst::Kind::Attr ? p.expr->attr : "a";
         }
         sub->projections.push_back(p);
         auto agg = std::make_shared<ScalarAst>();
         agg->kind = ScalarAst::Kind::Agg;
         agg->name = s->name;
         agg->pos = s->pos;
         agg->sub = sub;
         return agg;
      }
      if (s->kind == ScalarAst::Kind::Agg) {
         auto c = clone(s);
         rename_aliases(*c, outer_names);
         return c;
      }
      auto c = std::make_shared<ScalarAst>(*s);
      if (s->kind == ScalarAst::Kind::Attr) {
         bool grouped = std::any_of(q->group_by.begin(), q->group_by.end(), [&](const auto& g) { return same_scalar(*g, *s); });
         if (!grouped) throw SemanticError("attribute " + to_sql(*s) + " is neither grouped nor aggregated", s->pos);
         rename_aliases(*c, outer_names);
         return c;
      }
      for (auto& a : c->args) a = rewrite(a);
      return c;
   };

   for (const auto& p : q->projections) {
      if (p.kind != Projection::Kind::Expr) throw SemanticError("* in a grouped query", p.pos);
      Projection np = p;
      np.expr = rewrite(p.expr);
      if (np.as.empty() && p.expr->kind == ScalarAst::Kind::Attr) np.as = p.expr->attr;
      outer->projections.push_back(np);
   }
   return outer;
}

} // namespace

QueryPtr desugar_groupby(const QueryPtr& q) {
   return desugar_rec(clone(q));
}

// ---- views ----

namespace {

QueryPtr inline_rec(const QueryPtr& q, const SchemaEnv& env, std::vector<std::string>& stack);

QueryPtr expand_view(const std::string& name, const SchemaEnv& env, std::vector<std::string>& stack, SourcePos pos) {
   if (std::find(stack.begin(), stack.end(), name) != stack.end())
      throw SemanticError("cyclic view definition through " + name, pos);
   stack.push_back(name);
   auto body = inline_rec(clone(env.views.at(name)), env, stack);
   stack.pop_back();
   return body;
}

void inline_scalar(ScalarAstPtr& s, const SchemaEnv& env, std::vector<std::string>& stack) {
   if (!s) return;
   for (auto& a : s->args) inline_scalar(a, env, stack);
   if (s->sub) s->sub = inline_rec(s->sub, env, stack);
}

void inline_pred(PredAstPtr& p, const SchemaEnv& env, std::vector<std::string>& stack) {
   if (!p) return;
   inline_scalar(p->lhs, env, stack);
   inline_scalar(p->rhs, env, stack);
   inline_pred(p->left, env, stack);
   inline_pred(p->right, env, stack);
   if (p->sub) p->sub = inline_rec(p->sub, env, stack);
}

QueryPtr inline_rec(const QueryPtr& q, const SchemaEnv& env, std::vector<std::string>& stack) {
   if (!q) return q;
   switch (q->kind) {
      case QueryAst::Kind::Table:
         if (env.is_view(q->table)) return expand_view(q->table, env, stack, q->pos);
         return q;
      case QueryAst::Kind::Select:
         for (auto& f : q->from) f.source = inline_rec(f.source, env, stack);
         for (auto& p : q->projections) inline_scalar(p.expr, env, stack);
         inline_pred(q->where, env, stack);
         for (auto& g : q->group_by) inline_scalar(g, env, stack);
         return q;
      default:
         q->left = inline_rec(q->left, env, stack);
         q->right = inline_rec(q->right, env, stack);
         return q;
   }
}

} // namespace

QueryPtr inline_views(const QueryPtr& q, const SchemaEnv& env) {
   std::vector<std::string> stack;
   return inline_rec(clone(q), env, stack);
}

QueryPtr prepare_query(const QueryPtr& q, const SchemaEnv& env) {
   auto out = desugar_groupby(inline_views(q, env));
   infer_schema(*out, env);
   return out;
}

// ---- analysis ----

namespace {

std::size_t column_of(const Schema& s, const std::string& attr, const std::string& table, SourcePos pos) {
   auto cols = s.find_all(attr);
   if (cols.size() != 1) throw SemanticError("table " + table + " has no attribute " + attr, pos);
   return cols[0];
}

void check_unique_names(const std::vector<Column>& cols, SourcePos pos) {
   std::set<std::string> seen;
   int opaque = 0;
   for (const auto& c : cols) {
      if (c.type == BaseType::Opaque) {
         if (++opaque > 1) throw SemanticError("more than one ?? in a schema", pos);
         continue;
      }
      if (!seen.insert(c.name).second) throw SemanticError("duplicate attribute " + c.name, pos);
   }
}

QueryPtr index_query(const SchemaEnv& env, const IndexStmt& ix) {
   auto schema = env.table(ix.table);
   std::vector<std::string> cols;
   auto keys = env.keys_of(ix.table);
   if (!keys.empty())
      for (auto c : keys.front()->columns) cols.push_back(schema->columns[c].name);
   for (const auto& a : ix.attrs)
      if (std::find(cols.begin(), cols.end(), a) == cols.end()) cols.push_back(a);
   auto q = std::make_shared<QueryAst>();
   q->kind = QueryAst::Kind::Select;
   q->pos = ix.pos;
   const std::string alias = "x";
   q->from.push_back({make_table(ix.table, ix.pos), alias, ix.pos});
   for (const auto& c : cols) {
      Projection p;
      p.kind = Projection::Kind::Expr;
      p.expr = make_attr(alias, c, ix.pos);
      p.as = c;
      q->projections.push_back(p);
   }
   return q;
}

} // namespace

AnalyzedProgram analyze(const Program& program) {
   AnalyzedProgram out;
   auto& env = out.env;
   auto name_taken = [&](const std::string& n) { return env.tables.count(n) || env.views.count(n); };

   for (const auto& st : program.statements) {
      if (auto s = std::get_if<SchemaStmt>(&st)) {
         if (env.schemas.count(s->name)) throw SemanticError("schema " + s->name + " declared twice", s->pos);
         check_unique_names(s->columns, s->pos);
         auto sch = std::make_shared<Schema>();
         sch->name = s->name;
         sch->columns = s->columns;
         env.schemas[s->name] = sch;
      } else if (auto t = std::get_if<TableStmt>(&st)) {
         if (name_taken(t->name)) throw SemanticError(t->name + " declared twice", t->pos);
         if (t->schema.empty()) {
            check_unique_names(t->inline_columns, t->pos);
            auto sch = std::make_shared<Schema>();
            sch->name = t->name;
            sch->columns = t->inline_columns;
            env.tables[t->name] = sch;
         } else {
            auto it = env.schemas.find(t->schema);
            if (it == env.schemas.end()) throw SemanticError("undeclared schema " + t->schema, t->pos);
            env.tables[t->name] = it->second;
         }
         env.table_order.push_back(t->name);
      } else if (auto k = std::get_if<KeyStmt>(&st)) {
         auto sch = env.table(k->table);
         if (!sch) throw SemanticError("undeclared table " + k->table, k->pos);
         KeyDecl kd{k->table, {}};
         for (const auto& a : k->attrs) kd.columns.push_back(column_of(*sch, a, k->table, k->pos));
         env.keys.push_back(kd);
      } else if (auto f = std::get_if<ForeignKeyStmt>(&st)) {
         auto src = env.table(f->table);
         auto dst = env.table(f->target);
         if (!src) throw SemanticError("undeclared table " + f->table, f->pos);
         if (!dst) throw SemanticError("undeclared table " + f->target, f->pos);
         if (f->attrs.size() != f->target_attrs.size()) throw SemanticError("foreign key arity mismatch", f->pos);
         ForeignKeyDecl fd{f->table, {}, f->target, {}};
         for (const auto& a : f->attrs) fd.source_columns.push_back(column_of(*src, a, f->table, f->pos));
         for (const auto& a : f->target_attrs) fd.target_columns.push_back(column_of(*dst, a, f->target, f->pos));
         for (std::size_t i = 0; i < fd.source_columns.size(); ++i)
            if (!types_compatible(src->columns[fd.source_columns[i]].type, dst->columns[fd.target_columns[i]].type))
               throw SemanticError("foreign key type mismatch", f->pos);
         auto target_set = fd.target_columns;
         std::sort(target_set.begin(), target_set.end());
         bool is_key = false;
         for (auto kd : env.keys_of(f->target)) {
            auto cols = kd->columns;
            std::sort(cols.begin(), cols.end());
            if (cols == target_set) is_key = true;
         }
         if (!is_key) throw SemanticError("foreign key target " + f->target + " attributes are not a declared key", f->pos);
         env.foreign_keys.push_back(fd);
      } else if (auto v = std::get_if<ViewStmt>(&st)) {
         if (name_taken(v->name)) throw SemanticError(v->name + " declared twice", v->pos);
         env.views[v->name] = v->query;
         prepare_query(make_table(v->name, v->pos), env);
      } else if (auto ix = std::get_if<IndexStmt>(&st)) {
         if (name_taken(ix->name)) throw SemanticError(ix->name + " declared twice", ix->pos);
         auto sch = env.table(ix->table);
         if (!sch) throw SemanticError("undeclared table " + ix->table, ix->pos);
         for (const auto& a : ix->attrs) column_of(*sch, a, ix->table, ix->pos);
         env.views[ix->name] = index_query(env, *ix);
         env.indexes.insert(ix->name);
      } else if (auto vf = std::get_if<VerifyStmt>(&st)) {
         PreparedVerify pv;
         pv.name = vf->name;
         pv.pos = vf->pos;
         pv.lhs = vf->lhs;
         pv.rhs = vf->rhs;
         pv.lhs_prepared = prepare_query(vf->lhs, env);
         pv.rhs_prepared = prepare_query(vf->rhs, env);
         auto ls = infer_schema(*pv.lhs_prepared, env);
         auto rs = infer_schema(*pv.rhs_prepared, env);
         if (!union_compatible(*ls, *rs))
            throw SemanticError("queries of " + vf->name + " have different schemas " + describe(*ls) + " and " + describe(*rs), vf->pos);
         pv.schema = ls;
         out.verifies.push_back(std::move(pv));
      }
   }
   return out;
}

} // namespace ueq

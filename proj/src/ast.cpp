#include "ueq/ast.hpp"

#include <sstream>

namespace ueq {

QueryPtr make_table(std::string name, SourcePos pos) {
   auto q = std::make_shared<QueryAst>();
   q->kind = QueryAst::Kind::Table;
   q->table = std::move(name);
   q->pos = pos;
   return q;
}

ScalarAstPtr make_attr(std::string alias, std::string attr, SourcePos pos) {
   auto s = std::make_shared<ScalarAst>();
   s->kind = ScalarAst::Kind::Attr;
   s->alias = std::move(alias);
   s->attr = std::move(attr);
   s->pos = pos;
   return s;
}

PredAstPtr make_cmp(std::string op, ScalarAstPtr lhs, ScalarAstPtr rhs) {
   auto p = std::make_shared<PredAst>();
   p->kind = PredAst::Kind::Cmp;
   p->op = std::move(op);
   p->pos = lhs ? lhs->pos : SourcePos{};
   p->lhs = std::move(lhs);
   p->rhs = std::move(rhs);
   return p;
}

PredAstPtr make_and(PredAstPtr a, PredAstPtr b) {
   if (!a) return b;
   if (!b) return a;
   auto p = std::make_shared<PredAst>();
   p->kind = PredAst::Kind::And;
   p->pos = a->pos;
   p->left = std::move(a);
   p->right = std::move(b);
   return p;
}

ScalarAstPtr clone(const ScalarAstPtr& s) {
   if (!s) return nullptr;
   auto c = std::make_shared<ScalarAst>(*s);
   for (auto& a : c->args) a = clone(a);
   c->sub = clone(s->sub);
   return c;
}

PredAstPtr clone(const PredAstPtr& p) {
   if (!p) return nullptr;
   auto c = std::make_shared<PredAst>(*p);
   c->lhs = clone(p->lhs);
   c->rhs = clone(p->rhs);
   c->left = clone(p->left);
   c->right = clone(p->right);
   c->sub = clone(p->sub);
   return c;
}

QueryPtr clone(const QueryPtr& q) {
   if (!q) return nullptr;
   auto c = std::make_shared<QueryAst>(*q);
   for (auto& p : c->projections) p.expr = clone(p.expr);
   for (auto& f : c->from) f.source = clone(f.source);
   c->where = clone(q->where);
   for (auto& g : c->group_by) g = clone(g);
   c->left = clone(q->left);
   c->right = clone(q->right);
   return c;
}

std::string to_sql(const ScalarAst& s) {
   switch (s.kind) {
      case ScalarAst::Kind::Attr:
         return s.alias.empty() ? s.attr : s.alias + "." + s.attr;
      case ScalarAst::Kind::Const:
         if (s.literal_type == BaseType::String) return "'" + s.literal + "'";
         if (s.literal_type == BaseType::Int && !s.literal.empty() && s.literal[0] == '-') return "(" + s.literal + ")";
         return s.literal;
      case ScalarAst::Kind::Func: {
         static const std::string infix = "+-*/";
         if (s.args.size() == 2 && s.name.size() == 1 && infix.find(s.name[0]) != std::string::npos)
            return "(" + to_sql(*s.args[0]) + " " + s.name + " " + to_sql(*s.args[1]) + ")";
         std::string out = s.name + "(";
         for (std::size_t i = 0; i < s.args.size(); ++i) {
            if (i) out += ", ";
            out += to_sql(*s.args[i]);
         }
         return out + ")";
      }
      case ScalarAst::Kind::Agg:
         if (s.sub) return s.name + "(" + to_sql(*s.sub) + ")";
         if (s.star) return s.name + "(*)";
         return s.name + "(" + to_sql(*s.args.at(0)) + ")";
   }
   return "?";
}

std::string to_sql(const PredAst& p) {
   switch (p.kind) {
      case PredAst::Kind::True: return "TRUE";
      case PredAst::Kind::False: return "FALSE";
      case PredAst::Kind::Cmp: return to_sql(*p.lhs) + " " + p.op + " " + to_sql(*p.rhs);
      case PredAst::Kind::And: return "(" + to_sql(*p.left) + " AND " + to_sql(*p.right) + ")";
      case PredAst::Kind::Or: return "(" + to_sql(*p.left) + " OR " + to_sql(*p.right) + ")";
      case PredAst::Kind::Not: return "NOT (" + to_sql(*p.left) + ")";
      case PredAst::Kind::Exists: return "EXISTS (" + to_sql(*p.sub) + ")";
   }
   return "?";
}

std::string to_sql(const QueryAst& q) {
   switch (q.kind) {
      case QueryAst::Kind::Table: return q.table;
      case QueryAst::Kind::UnionAll: return "(" + to_sql(*q.left) + " UNION ALL " + to_sql(*q.right) + ")";
      case QueryAst::Kind::Except: return "(" + to_sql(*q.left) + " EXCEPT " + to_sql(*q.right) + ")";
      case QueryAst::Kind::Distinct: return "DISTINCT (" + to_sql(*q.left) + ")";
      case QueryAst::Kind::Select: break;
   }
   std::string out = "(SELECT ";
   if (q.distinct) out += "DISTINCT ";
   for (std::size_t i = 0; i < q.projections.size(); ++i) {
      if (i) out += ", ";
      const auto& p = q.projections[i];
      switch (p.kind) {
         case Projection::Kind::Star: out += "*"; break;
         case Projection::Kind::AliasStar: out += p.alias + ".*"; break;
         case Projection::Kind::Expr:
            out += to_sql(*p.expr);
            if (!p.as.empty()) out += " AS " + p.as;
            break;
      }
   }
   out += " FROM ";
   for (std::size_t i = 0; i < q.from.size(); ++i) {
      if (i) out += ", ";
      const auto& f = q.from[i];
      if (f.source->kind == QueryAst::Kind::Table)
         out += f.source->table;
      else
         out += to_sql(*f.source);
      out += " " + f.alias;
   }
   if (q.where) out += " WHERE " + to_sql(*q.where);
   if (!q.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < q.group_by.size(); ++i) {
         if (i) out += ", ";
         out += to_sql(*q.group_by[i]);
      }
   }
   return out + ")";
}

namespace {

std::string column_list(const std::vector<Column>& columns) {
   std::string out;
   for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += ", ";
      if (columns[i].type == BaseType::Opaque)
         out += "??";
      else
         out += columns[i].name + ":" + std::string(to_string(columns[i].type));
   }
   return out;
}

std::string name_list(const std::vector<std::string>& names) {
   std::string out;
   for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out += ", ";
      out += names[i];
   }
   return out;
}

struct StatementPrinter {
   std::ostringstream& out;
   void operator()(const SchemaStmt& s) { out << "schema " << s.name << "(" << column_list(s.columns) << ");\n"; }
   void operator()(const TableStmt& t) {
      if (t.schema.empty())
         out << "table " << t.name << "(" << column_list(t.inline_columns) << ");\n";
      else
         out << "table " << t.name << "(" << t.schema << ");\n";
   }
   void operator()(const KeyStmt& k) { out << "key " << k.table << "(" << name_list(k.attrs) << ");\n"; }
   void operator()(const ForeignKeyStmt& f) {
      out << "foreign key " << f.table << "(" << name_list(f.attrs) << ") references " << f.target << "("
          << name_list(f.target_attrs) << ");\n";
   }
   void operator()(const ViewStmt& v) { out << "view " << v.name << " AS " << to_sql(*v.query) << ";\n"; }
   void operator()(const IndexStmt& i) { out << "index " << i.name << " on " << i.table << "(" << name_list(i.attrs) << ");\n"; }
   void operator()(const VerifyStmt& v) {
      out << "verify " << v.name << ": " << to_sql(*v.lhs) << " == " << to_sql(*v.rhs) << ";\n";
   }
};

} // namespace

std::string to_source(const Program& program) {
   std::ostringstream out;
   for (const auto& st : program.statements) std::visit(StatementPrinter{out}, st);
   return out.str();
}

} // namespace ueq

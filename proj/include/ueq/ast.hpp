#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ueq/schema.hpp"

namespace ueq {

struct SourcePos {
   int line = 0;
   int col = 0;
};

struct QueryAst;
struct ScalarAst;
struct PredAst;
using QueryPtr = std::shared_ptr<QueryAst>;
using ScalarAstPtr = std::shared_ptr<ScalarAst>;
using PredAstPtr = std::shared_ptr<PredAst>;

struct ScalarAst {
   enum class Kind { Attr, Const, Func, Agg };
   Kind kind = Kind::Const;
   SourcePos pos;

   // Attr: `alias.attr`, or bare `attr` when alias is empty.
   std::string alias;
   std::string attr;

   // Const
   std::string literal;
   BaseType literal_type = BaseType::Int;

   // Func / Agg
   std::string name;
   std::vector<ScalarAstPtr> args;
   // Agg over a subquery; `count(*)` inside GROUP BY has star set and no args.
   QueryPtr sub;
   bool star = false;
};

struct PredAst {
   enum class Kind { True, False, Cmp, And, Or, Not, Exists };
   Kind kind = Kind::True;
   SourcePos pos;
   std::string op;            // Cmp: = <> != < <= > >=
   ScalarAstPtr lhs, rhs;     // Cmp
   PredAstPtr left, right;    // And / Or / Not(left)
   QueryPtr sub;              // Exists
};

struct Projection {
   enum class Kind { Star, AliasStar, Expr };
   Kind kind = Kind::Expr;
   std::string alias;         // AliasStar
   ScalarAstPtr expr;         // Expr
   std::string as;            // Expr, may be empty
   SourcePos pos;
};

struct FromItem {
   QueryPtr source;           // Table node for base relations and views
   std::string alias;
   SourcePos pos;
};

/// A query node. One Select node carries projection, FROM, WHERE and GROUP BY.
struct QueryAst {
   enum class Kind { Table, Select, UnionAll, Except, Distinct };
   Kind kind = Kind::Table;
   SourcePos pos;

   std::string table;                   // Table

   bool distinct = false;               // Select
   std::vector<Projection> projections;
   std::vector<FromItem> from;
   PredAstPtr where;                    // may be null
   std::vector<ScalarAstPtr> group_by;

   QueryPtr left, right;                // UnionAll / Except; Distinct uses left
};

struct SchemaStmt {
   std::string name;
   std::vector<Column> columns;
   SourcePos pos;
};

struct TableStmt {
   std::string name;
   std::string schema;                  // empty when declared inline
   std::vector<Column> inline_columns;
   SourcePos pos;
};

struct KeyStmt {
   std::string table;
   std::vector<std::string> attrs;
   SourcePos pos;
};

struct ForeignKeyStmt {
   std::string table;
   std::vector<std::string> attrs;
   std::string target;
   std::vector<std::string> target_attrs;
   SourcePos pos;
};

struct ViewStmt {
   std::string name;
   QueryPtr query;
   SourcePos pos;
};

struct IndexStmt {
   std::string name;
   std::string table;
   std::vector<std::string> attrs;
   SourcePos pos;
};

struct VerifyStmt {
   std::string name;
   QueryPtr lhs, rhs;
   SourcePos pos;
};

using Statement = std::variant<SchemaStmt, TableStmt, KeyStmt, ForeignKeyStmt, ViewStmt, IndexStmt, VerifyStmt>;

struct Program {
   std::vector<Statement> statements;
};

// Constructors used by the desugaring passes and by tests.
QueryPtr make_table(std::string name, SourcePos pos = {});
ScalarAstPtr make_attr(std::string alias, std::string attr, SourcePos pos = {});
PredAstPtr make_cmp(std::string op, ScalarAstPtr lhs, ScalarAstPtr rhs);
PredAstPtr make_and(PredAstPtr a, PredAstPtr b);

QueryPtr clone(const QueryPtr& q);
ScalarAstPtr clone(const ScalarAstPtr& s);
PredAstPtr clone(const PredAstPtr& p);

/// Fully parenthesised SQL text; parsing the output yields the same tree.
std::string to_sql(const QueryAst& q);
std::string to_sql(const ScalarAst& s);
std::string to_sql(const PredAst& p);
std::string to_source(const Program& program);

} // namespace ueq

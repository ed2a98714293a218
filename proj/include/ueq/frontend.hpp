#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ueq/ast.hpp"
#include "ueq/schema.hpp"

namespace ueq {

struct KeyDecl {
   std::string table;
   std::vector<std::size_t> columns;
};

struct ForeignKeyDecl {
   std::string source;
   std::vector<std::size_t> source_columns;
   std::string target;
   std::vector<std::size_t> target_columns;
};

struct SchemaEnv {
   std::map<std::string, SchemaPtr> schemas;
   std::map<std::string, SchemaPtr> tables;
   std::vector<std::string> table_order;
   std::vector<KeyDecl> keys;
   std::vector<ForeignKeyDecl> foreign_keys;
   /// Views and indexes by name; indexes are stored as their projection query.
   std::map<std::string, QueryPtr> views;
   std::set<std::string> indexes;

   SchemaPtr table(const std::string& name) const;
   bool is_view(const std::string& name) const { return views.count(name) > 0; }
   std::vector<const KeyDecl*> keys_of(const std::string& table) const;
};

/// One FROM-clause worth of aliases; `parent` links to the enclosing query for correlation.
struct ScopeFrame {
   std::vector<std::pair<std::string, SchemaPtr>> aliases;
   const ScopeFrame* parent = nullptr;
};

struct ResolvedAttr {
   std::string alias;
   SchemaPtr schema;
   /// Empty when the attribute is not declared but the schema is generic.
   std::optional<std::size_t> column;
   int depth = 0;
};

ResolvedAttr resolve_attr(const ScalarAst& attr, const ScopeFrame* scope);

/// Output schema of a query. Also validates every attribute reference, comparison and
/// union inside it. `scope` provides correlated outer aliases.
SchemaPtr infer_schema(const QueryAst& q, const SchemaEnv& env, const ScopeFrame* scope = nullptr);

/// Type of a scalar expression in scope.
BaseType infer_type(const ScalarAst& s, const SchemaEnv& env, const ScopeFrame* scope);

/// Schema of the source of a FROM item (table, view or subquery).
SchemaPtr source_schema(const QueryAst& source, const SchemaEnv& env, const ScopeFrame* scope);

/// Rewrites every grouped SELECT into an outer scan with correlated aggregate subqueries.
QueryPtr desugar_groupby(const QueryPtr& q);

/// Replaces views and indexes by their defining queries, transitively.
QueryPtr inline_views(const QueryPtr& q, const SchemaEnv& env);

/// inline_views followed by desugar_groupby, with validation of the result.
QueryPtr prepare_query(const QueryPtr& q, const SchemaEnv& env);

bool union_compatible(const Schema& a, const Schema& b);

struct PreparedVerify {
   std::string name;
   SourcePos pos;
   QueryPtr lhs, rhs;                   // as written
   QueryPtr lhs_prepared, rhs_prepared; // view-free and GROUP-BY-free
   SchemaPtr schema;
};

struct AnalyzedProgram {
   SchemaEnv env;
   std::vector<PreparedVerify> verifies;
};

/// Builds the schema environment and validates the program. Throws SemanticError.
AnalyzedProgram analyze(const Program& program);

} // namespace ueq

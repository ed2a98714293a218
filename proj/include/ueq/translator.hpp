#pragma once

#include "ueq/ast.hpp"
#include "ueq/frontend.hpp"
#include "ueq/uexp.hpp"

namespace ueq {

struct Denotation {
   TupleVar output;
   Expr body;
};

/// Tuple variables bound by enclosing FROM clauses, for correlated subqueries.
struct Bindings {
   ScopeFrame frame;
   std::vector<TupleVar> vars;
   const Bindings* parent = nullptr;
};

/// Denotes a view-free, GROUP-BY-free query as a function of a fresh output variable.
Denotation denote(const QueryAst& q, const SchemaEnv& env);

/// Denotes `q` with `out` as its output variable.
Expr denote_into(const QueryAst& q, const TupleVar& out, const SchemaEnv& env, const Bindings* outer = nullptr);

} // namespace ueq

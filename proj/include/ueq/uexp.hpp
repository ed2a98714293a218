#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ueq/schema.hpp"

namespace ueq {

/// A tuple variable ranging over Tuple(schema). Identity is the id alone.
struct TupleVar {
   int id = -1;
   SchemaPtr schema;

   bool valid() const { return id >= 0; }
   bool operator==(const TupleVar& o) const { return id == o.id; }
   bool operator!=(const TupleVar& o) const { return id != o.id; }
   bool operator<(const TupleVar& o) const { return id < o.id; }
};

TupleVar fresh_var(SchemaPtr schema);

/// Restarts variable numbering for the current thread and restores it on exit,
/// so that each verification produces the same variable ids on every run.
class FreshScope {
 public:
   FreshScope();
   ~FreshScope();
   FreshScope(const FreshScope&) = delete;
   FreshScope& operator=(const FreshScope&) = delete;

 private:
   int saved_;
};

std::string var_name(const TupleVar& v);

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ScalarNode;
using Scalar = std::shared_ptr<const ScalarNode>;

struct ScalarNode {
   enum class Kind { Attr, Const, Func, Agg };
   Kind kind = Kind::Const;
   TupleVar var;              // Attr, Agg (bound variable)
   std::size_t column = 0;    // Attr
   std::string value;         // Const
   BaseType type = BaseType::Int;
   std::string name;          // Func, Agg
   std::vector<Scalar> args;  // Func
   Expr body;                 // Agg: multiplicity of each bound tuple
};

struct PredAtom {
   enum class Kind { Eq, Cmp };
   Kind kind = Kind::Eq;
   std::string op;            // Cmp: ">" or ">="
   Scalar lhs, rhs;
};

struct ExprNode {
   enum class Kind { Zero, One, Add, Mul, Squash, Not, Sum, Pred, Rel };
   Kind kind = Kind::Zero;
   Expr a, b;                 // Add, Mul use both; Squash, Not, Sum use a
   TupleVar var;              // Sum binder, Rel argument
   PredAtom pred;
   std::string rel;
};

// ---- construction ----
Scalar attr(const TupleVar& v, std::size_t column);
Scalar constant(std::string value, BaseType type);
Scalar func(std::string name, std::vector<Scalar> args);
Scalar aggregate(std::string name, const TupleVar& bound, Expr body);

PredAtom eq_atom(Scalar a, Scalar b);
PredAtom cmp_atom(std::string op, Scalar a, Scalar b);

Expr zero();
Expr one();
Expr add(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr squash(Expr a);
Expr neg(Expr a);
Expr sum(const TupleVar& v, Expr body);
Expr pred(PredAtom p);
Expr rel(std::string name, const TupleVar& v);
Expr add_all(const std::vector<Expr>& xs);
Expr mul_all(const std::vector<Expr>& xs);
Expr sum_all(const std::vector<TupleVar>& vs, Expr body);

// ---- structure ----
int compare(const Scalar& a, const Scalar& b);
bool operator==(const PredAtom& a, const PredAtom& b);
int compare(const PredAtom& a, const PredAtom& b);
bool same_scalar(const Scalar& a, const Scalar& b);

/// Ids of free tuple variables.
std::set<int> free_vars(const Expr& e);
std::set<int> free_vars(const Scalar& s);
std::set<int> free_vars(const PredAtom& p);
/// Free tuple variables together with their schemas.
std::map<int, TupleVar> free_var_map(const Expr& e);
void collect_free(const Scalar& s, std::map<int, TupleVar>& out);

std::size_t node_count(const Expr& e);

/// Simultaneous, capture-avoiding substitution. A variable either maps to another
/// variable, or has each of its columns replaced by a scalar. The latter throws
/// SemanticError if the variable occurs as a relation argument.
struct VarSubst {
   std::map<int, TupleVar> rename;
   std::map<int, std::vector<Scalar>> columns;
   bool empty() const { return rename.empty() && columns.empty(); }
};

Expr substitute(const Expr& e, const VarSubst& s);
Scalar substitute(const Scalar& e, const VarSubst& s);
PredAtom substitute(const PredAtom& p, const VarSubst& s);

Expr rename(const Expr& e, const TupleVar& from, const TupleVar& to);
/// Replaces the columns of `v` by `replacement` (one scalar per column of v's schema).
Expr substitute_columns(const Expr& e, const TupleVar& v, const std::vector<Scalar>& replacement);

/// Structural equality up to renaming of bound variables.
bool alpha_equal(const Expr& a, const Expr& b);
bool alpha_equal(const Scalar& a, const Scalar& b);

struct PrintOptions {
   /// Number variables by first appearance (t1, t2, ...) instead of by id.
   bool renumber = true;
};

std::string to_string(const Expr& e, PrintOptions opt = {});
std::string to_string(const Scalar& s, PrintOptions opt = {});
std::string to_string(const PredAtom& p, PrintOptions opt = {});

/// Printing context reusable across several expressions so that names agree.
class Printer {
 public:
   explicit Printer(PrintOptions opt = {}) : opt_(opt) {}
   std::string operator()(const Expr& e);
   std::string operator()(const Scalar& s);
   std::string operator()(const PredAtom& p);
   std::string name(const TupleVar& v);

 private:
   PrintOptions opt_;
   std::map<int, int> numbering_;
};

} // namespace ueq

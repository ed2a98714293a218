#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ueq/ast.hpp"
#include "ueq/frontend.hpp"
#include "ueq/uexp.hpp"

namespace ueq {

using Value = std::int64_t;
using Tuple = std::vector<Value>;
/// Tuple multiplicities; absent tuples have multiplicity zero.
using Bag = std::map<Tuple, std::int64_t>;

class OracleLimit : public std::runtime_error {
 public:
   using std::runtime_error::runtime_error;
};

/// A finite N-relation instance. Every value, including the result of any
/// function, lies in `universe`, which is also the summation domain of each column.
struct FiniteDb {
   std::map<std::string, Bag> relations;
   std::vector<Value> universe;

   const Bag& rel(const std::string& name) const;
   std::string dump(const SchemaEnv* env = nullptr) const;
};

/// Sorted, duplicate-free {0, ..., domain-1} together with `extra`.
std::vector<Value> make_universe(int domain, const std::vector<Value>& extra = {});

/// Maps an arbitrary integer into the universe, as the identity on its members.
Value wrap(Value v, const std::vector<Value>& universe);
Value const_value(const std::string& literal, BaseType type, const std::vector<Value>& universe);
Value apply_function(const std::string& name, const std::vector<Value>& args, const std::vector<Value>& universe);
/// Literals of a query, as raw values, for inclusion in a universe.
std::vector<Value> query_constants(const QueryAst& q);

struct EvalOptions {
   std::size_t max_tuple_space = 250000;
};

using Binding = std::map<int, Tuple>;

std::int64_t eval_uexp(const Expr& e, const FiniteDb& db, Binding& binding, const EvalOptions& opt = {});
Value eval_scalar(const Scalar& s, const FiniteDb& db, Binding& binding, const EvalOptions& opt = {});
bool eval_pred(const PredAtom& p, const FiniteDb& db, Binding& binding, const EvalOptions& opt = {});
/// Every tuple of the universe of the given width.
std::vector<Tuple> tuple_space(std::size_t width, const std::vector<Value>& universe, const EvalOptions& opt = {});

/// Direct bag-semantics interpreter over the query syntax, with views and indexes
/// evaluated by name and GROUP BY evaluated directly.
Bag eval_query(const QueryAst& q, const SchemaEnv& env, const FiniteDb& db);

/// Keys hold (total multiplicity per key value at most one) and every foreign-key
/// source value has exactly one matching target tuple, of multiplicity one.
bool check_constraints(const FiniteDb& db, const SchemaEnv& env);

struct GenOptions {
   int domain = 3;
   int max_tuples = 3;
   int min_tuples = 0;
   int max_mult = 3;
   std::uint64_t seed = 1;
   std::vector<Value> extra_values;
   /// Relations to populate; every declared table when empty.
   std::vector<std::string> relations;
   int attempts_per_db = 50;
};

struct GenResult {
   std::vector<FiniteDb> dbs;
   std::string diagnostic;
};

/// Seeded stream of constraint-satisfying databases.
GenResult gen_instances(const SchemaEnv& env, const GenOptions& opt, std::size_t count);
/// Every constraint-satisfying database within the limits, or a diagnostic when
/// there are more than `cap`.
GenResult enumerate_instances(const SchemaEnv& env, const GenOptions& opt, std::size_t cap = 100000);

struct DiffResult {
   std::size_t disagreements = 0;
   std::optional<std::size_t> first;
};

/// Databases on which the two queries produce different bags.
DiffResult differential_serial(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env,
                               const std::vector<FiniteDb>& dbs);
DiffResult differential_parallel(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env,
                                 const std::vector<FiniteDb>& dbs);

/// Points where eval_uexp of `e` (free in `out`) differs from the bag `expected`.
/// Checks the whole output space when it is small, the support of `expected` otherwise.
bool denotation_agrees(const Expr& e, const TupleVar& out, const Bag& expected, const FiniteDb& db,
                       const EvalOptions& opt = {});

std::string dump_bag(const Bag& b);

} // namespace ueq

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ueq/uexp.hpp"

namespace ueq {

enum class Axiom {
   // commutative semiring
   AddZero,          // x + 0 = x
   AddComm,          // x + y = y + x
   AddAssoc,         // (x + y) + z = x + (y + z)
   MulOne,           // x * 1 = x
   MulZero,          // x * 0 = 0
   MulComm,          // x * y = y * x                      (prod-comm)
   MulAssoc,         // (x * y) * z = x * (y * z)          (prod-assoc)
   DistrL,           // x * (y + z) = x*y + x*z            (distr-prod-plus-l)
   DistrR,           // (x + y) * z = x*z + y*z            (distr-prod-plus-r)
   // squash
   SquashZero,       // ||0|| = 0
   SquashOnePlus,    // ||1 + x|| = 1
   SquashAddSquash,  // ||(||x|| + y)|| = ||x + y||
   SquashMul,        // ||x|| * ||y|| = ||x * y||          (pull-merely)
   SquashSquare,     // ||x|| * ||x|| = ||x||
   SquashSelf,       // x * ||x|| = x
   SquashIdempotent, // x * x = x  implies  ||x|| = x
   // negation
   NotZero,          // not(0) = 1
   NotMul,           // not(x * y) = ||not(x) + not(y)||
   NotAdd,           // not(x + y) = not(x) * not(y)
   PullNot,          // not(x) * not(y) = not(x + y)       (pull-not)
   NotSquash,        // not(||x||) = not(x)
   SquashNot,        // ||not(x)|| = not(x)
   // summation
   DistrSum,         // sum_t (f1 + f2) = sum_t f1 + sum_t f2
   SumSwap,          // sum_t1 sum_t2 f = sum_t2 sum_t1 f
   PullSumL,         // x * sum_t f = sum_t (x * f)
   PullSumR,         // (sum_t f) * x = sum_t (f * x)
   SquashSumSquash,  // ||sum_t f|| = ||sum_t ||f||||
   // predicates
   PredSquash,       // [b] = ||[b]||
   ExcludedMiddle,   // 1 = [e1 = e2] + not([e1 = e2])
   EqSubst,          // x * [e1 = e2] = x{e1 := e2} * [e1 = e2]
   SumEqOne,         // sum_t [t = e] = 1
   SumSubstEq,       // sum_t [t = e] * f(t) = f(e)
};

std::string_view axiom_name(Axiom a);
std::optional<Axiom> axiom_from_name(std::string_view name);
const std::vector<Axiom>& all_axioms();

/// Child indices from the root: 0 selects the first operand (or the body), 1 the second.
using Path = std::vector<int>;
std::string path_string(const Path& p);

struct ProofStep {
   Axiom axiom;
   Path path;
};

struct AxiomArgs {
   Scalar e1, e2;                 // ExcludedMiddle
   std::vector<ProofStep> proof;  // SquashIdempotent: rewrites x * x into x
};

class AxiomMismatch : public std::runtime_error {
 public:
   using std::runtime_error::runtime_error;
};

Expr subterm(const Expr& e, const Path& path);
Expr replace_at(const Expr& e, const Path& path, const Expr& replacement);

/// Rewrites the subterm at `path` left to right with the given axiom.
/// Throws AxiomMismatch when the left-hand side does not match.
Expr apply_axiom(const Expr& e, Axiom axiom, const Path& path = {}, const AxiomArgs& args = {});

/// Replaces every free occurrence of scalar `from` by `to` in e.
Expr replace_scalar(const Expr& e, const Scalar& from, const Scalar& to);

} // namespace ueq

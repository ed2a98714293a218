#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ueq/session.hpp"
#include "ueq/uexp.hpp"

namespace ueq {

/// Owning pointer with value semantics, for the recursive slots of a term.
template <class T>
class Box {
 public:
   Box() = default;
   Box(T value) : p_(std::make_unique<T>(std::move(value))) {}
   Box(const Box& o) : p_(o.p_ ? std::make_unique<T>(*o.p_) : nullptr) {}
   Box(Box&&) noexcept = default;
   Box& operator=(const Box& o) {
      p_ = o.p_ ? std::make_unique<T>(*o.p_) : nullptr;
      return *this;
   }
   Box& operator=(Box&&) noexcept = default;

   explicit operator bool() const { return static_cast<bool>(p_); }
   T& operator*() { return *p_; }
   const T& operator*() const { return *p_; }
   T* operator->() { return p_.get(); }
   const T* operator->() const { return p_.get(); }
   void reset() { p_.reset(); }

 private:
   std::unique_ptr<T> p_;
};

struct RelAtom {
   std::string rel;
   TupleVar var;
};

struct Spnf;

/// sum_{vars} [p1] * ... * ||squash|| * not(negation) * R1(t1) * ...
/// An absent squash slot stands for ||1||, an absent negation slot for not(0).
struct Term {
   std::vector<TupleVar> sum_vars;
   std::vector<PredAtom> preds;
   Box<Spnf> squash;
   Box<Spnf> negation;
   std::vector<RelAtom> atoms;

   bool is_unit() const { return sum_vars.empty() && preds.empty() && !squash && !negation && atoms.empty(); }
   /// Only a squash slot: the term is ||E||.
   bool is_pure_squash() const { return sum_vars.empty() && preds.empty() && squash && !negation && atoms.empty(); }
};

struct Spnf {
   std::vector<Term> terms;
};

/// Rewrites e into sum-product normal form, logging each rule firing in the session trace.
Spnf to_spnf(const Expr& e, Session* session = nullptr);

Expr to_uexp(const Term& t);
Expr to_uexp(const Spnf& s);

/// Shape check of a U-expression against the normal-form grammar.
bool is_spnf(const Expr& e);
/// Invariant check of a normal form: distinct binders, non-empty slots, atom variables
/// bound by a sum or listed in `free` (when `free` is non-empty).
bool check_spnf(const Spnf& s, const std::set<int>& free = {});

Term term_product(const Term& a, const Term& b);
Spnf spnf_product(const Spnf& a, const Spnf& b);

Term substitute(const Term& t, const VarSubst& s);
Spnf substitute(const Spnf& s, const VarSubst& sub);

std::set<int> free_vars(const Term& t);
std::set<int> free_vars(const Spnf& s);
std::size_t size(const Spnf& s);

std::string to_string(const Spnf& s, Printer& p);
std::string to_string(const Spnf& s, PrintOptions opt = {});

} // namespace ueq

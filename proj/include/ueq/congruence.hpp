#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ueq/uexp.hpp"

namespace ueq {

struct ScalarLess {
   bool operator()(const Scalar& a, const Scalar& b) const { return compare(a, b) < 0; }
};

/// Congruence closure over scalar terms: attributes, constants, uninterpreted
/// functions and aggregates. Function applications with congruent arguments are
/// merged; aggregates are merged when the supplied oracle says so.
class Congruence {
 public:
   /// Receives the two aggregates and the equalities known so far.
   using AggEqual = std::function<bool(const Scalar&, const Scalar&, const std::vector<PredAtom>&)>;

   explicit Congruence(AggEqual agg_equal = {});

   int add(const Scalar& s);
   void merge(const Scalar& a, const Scalar& b);
   void assume(const PredAtom& p);
   void assume_all(const std::vector<PredAtom>& ps);
   /// Adds both sides, restores the closure and tests class membership.
   bool equal(const Scalar& a, const Scalar& b);
   bool entails(const PredAtom& p);
   /// Two atoms of the same kind and operator whose arguments are pairwise congruent.
   bool congruent(const PredAtom& a, const PredAtom& b);

   /// Two distinct constants of the same type ended up in one class.
   bool inconsistent();

   /// Classes of the scalars added so far, each sorted, in order of their least member.
   std::vector<std::vector<Scalar>> classes();
   std::vector<Scalar> members_of(const Scalar& s);
   /// Every equality of the closure between members of `among` (all members when empty).
   std::vector<PredAtom> equalities(const std::vector<Scalar>& among = {});

   /// Each scalar equated with its class representative, without restoring the closure.
   std::vector<PredAtom> spanning_equalities() const;

   std::size_t size() const { return nodes_.size(); }

 private:
   std::vector<Scalar> nodes_;
   std::vector<int> parent_;
   std::vector<std::vector<int>> children_;
   std::map<Scalar, int, ScalarLess> index_;
   AggEqual agg_equal_;
   bool dirty_ = false;
   std::map<std::pair<int, int>, bool> agg_cache_;

   int find(int x) const;
   void unite(int a, int b);
   void close();
};

} // namespace ueq

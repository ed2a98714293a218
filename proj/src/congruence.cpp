#include "ueq/congruence.hpp"

#include <algorithm>

namespace ueq {

Congruence::Congruence(AggEqual agg_equal) : agg_equal_(std::move(agg_equal)) {}

int Congruence::find(int x) const {
   while (parent_[x] != x) x = parent_[x];
   return x;
}

void Congruence::unite(int a, int b) {
   a = find(a);
   b = find(b);
   if (a == b) return;
   if (compare(nodes_[b], nodes_[a]) < 0) std::swap(a, b);
   parent_[b] = a;
   dirty_ = true;
}

int Congruence::add(const Scalar& s) {
   if (auto it = index_.find(s); it != index_.end()) return it->second;
   std::vector<int> kids;
   if (s->kind == ScalarNode::Kind::Func)
      for (const auto& a : s->args) kids.push_back(add(a));
   int id = static_cast<int>(nodes_.size());
   nodes_.push_back(s);
   parent_.push_back(id);
   children_.push_back(std::move(kids));
   index_.emplace(s, id);
   if (s->kind == ScalarNode::Kind::Func || s->kind == ScalarNode::Kind::Agg) dirty_ = true;
   return id;
}

void Congruence::merge(const Scalar& a, const Scalar& b) {
   unite(add(a), add(b));
}

void Congruence::assume(const PredAtom& p) {
   if (p.kind == PredAtom::Kind::Eq) {
      merge(p.lhs, p.rhs);
   } else {
      add(p.lhs);
      add(p.rhs);
   }
}

void Congruence::assume_all(const std::vector<PredAtom>& ps) {
   for (const auto& p : ps) assume(p);
}

void Congruence::close() {
   while (dirty_) {
      dirty_ = false;
      std::map<std::pair<std::string, std::vector<int>>, int> sigs;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
         if (nodes_[i]->kind != ScalarNode::Kind::Func) continue;
         std::vector<int> reps;
         for (int c : children_[i]) reps.push_back(find(c));
         auto key = std::make_pair(nodes_[i]->name, std::move(reps));
         auto [it, fresh] = sigs.emplace(std::move(key), static_cast<int>(i));
         if (!fresh) unite(it->second, static_cast<int>(i));
      }
      if (dirty_ || !agg_equal_) continue;
      for (std::size_t i = 0; i < nodes_.size() && !dirty_; ++i) {
         if (nodes_[i]->kind != ScalarNode::Kind::Agg) continue;
         for (std::size_t j = i + 1; j < nodes_.size() && !dirty_; ++j) {
            if (nodes_[j]->kind != ScalarNode::Kind::Agg || nodes_[j]->name != nodes_[i]->name) continue;
            if (find(static_cast<int>(i)) == find(static_cast<int>(j))) continue;
            auto key = std::make_pair(static_cast<int>(i), static_cast<int>(j));
            if (auto it = agg_cache_.find(key); it != agg_cache_.end() && !it->second) continue;
            bool same = agg_equal_(nodes_[i], nodes_[j], spanning_equalities());
            agg_cache_[key] = same;
            if (same) unite(static_cast<int>(i), static_cast<int>(j));
         }
      }
      // later merges may enable aggregates rejected earlier
      if (dirty_) agg_cache_.clear();
   }
}

bool Congruence::equal(const Scalar& a, const Scalar& b) {
   int x = add(a);
   int y = add(b);
   close();
   return find(x) == find(y);
}

bool Congruence::entails(const PredAtom& p) {
   if (p.kind == PredAtom::Kind::Eq) return equal(p.lhs, p.rhs);
   return false;
}

bool Congruence::congruent(const PredAtom& a, const PredAtom& b) {
   if (a.kind != b.kind || a.op != b.op) return false;
   if (equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs)) return true;
   return a.kind == PredAtom::Kind::Eq && equal(a.lhs, b.rhs) && equal(a.rhs, b.lhs);
}

bool Congruence::inconsistent() {
   close();
   std::map<int, Scalar> seen;
   for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i]->kind != ScalarNode::Kind::Const) continue;
      int r = find(static_cast<int>(i));
      auto [it, fresh] = seen.emplace(r, nodes_[i]);
      if (!fresh && it->second->type == nodes_[i]->type && it->second->value != nodes_[i]->value) return true;
   }
   return false;
}

std::vector<std::vector<Scalar>> Congruence::classes() {
   close();
   std::map<int, std::vector<Scalar>> by_rep;
   for (std::size_t i = 0; i < nodes_.size(); ++i) by_rep[find(static_cast<int>(i))].push_back(nodes_[i]);
   std::vector<std::vector<Scalar>> out;
   for (auto& [_, members] : by_rep) {
      std::sort(members.begin(), members.end(), ScalarLess{});
      out.push_back(std::move(members));
   }
   std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return compare(a[0], b[0]) < 0; });
   return out;
}

std::vector<Scalar> Congruence::members_of(const Scalar& s) {
   int x = add(s);
   close();
   std::vector<Scalar> out;
   for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (find(static_cast<int>(i)) == find(x)) out.push_back(nodes_[i]);
   std::sort(out.begin(), out.end(), ScalarLess{});
   return out;
}

std::vector<PredAtom> Congruence::equalities(const std::vector<Scalar>& among) {
   close();
   std::vector<PredAtom> out;
   for (const auto& cls : classes()) {
      std::vector<Scalar> keep;
      for (const auto& s : cls) {
         if (among.empty()) {
            keep.push_back(s);
            continue;
         }
         for (const auto& a : among)
            if (compare(a, s) == 0) {
               keep.push_back(s);
               break;
            }
      }
      for (std::size_t i = 0; i < keep.size(); ++i)
         for (std::size_t j = i + 1; j < keep.size(); ++j) out.push_back(eq_atom(keep[i], keep[j]));
   }
   return out;
}

std::vector<PredAtom> Congruence::spanning_equalities() const {
   std::vector<PredAtom> out;
   for (std::size_t i = 0; i < nodes_.size(); ++i) {
      int r = find(static_cast<int>(i));
      if (r != static_cast<int>(i)) out.push_back(eq_atom(nodes_[r], nodes_[i]));
   }
   return out;
}

} // namespace ueq

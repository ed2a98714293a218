#include "ueq/spnf.hpp"

#include "ueq/axioms.hpp"
#include <functional>

#include "ueq/errors.hpp"

namespace ueq {

// ---- free variables and substitution ----

std::set<int> free_vars(const Term& t) {
   std::set<int> out;
   for (const auto& p : t.preds)
      for (int v : free_vars(p)) out.insert(v);
   for (const auto& a : t.atoms) out.insert(a.var.id);
   if (t.squash)
      for (int v : free_vars(*t.squash)) out.insert(v);
   if (t.negation)
      for (int v : free_vars(*t.negation)) out.insert(v);
   for (const auto& v : t.sum_vars) out.erase(v.id);
   return out;
}

std::set<int> free_vars(const Spnf& s) {
   std::set<int> out;
   for (const auto& t : s.terms)
      for (int v : free_vars(t)) out.insert(v);
   return out;
}

namespace {

std::set<int> subst_range(const VarSubst& s) {
   std::set<int> out;
   for (const auto& [_, v] : s.rename) out.insert(v.id);
   for (const auto& [_, cols] : s.columns)
      for (const auto& c : cols)
         for (int id : free_vars(c)) out.insert(id);
   return out;
}

} // namespace

Term substitute(const Term& t, const VarSubst& s) {
   if (s.empty()) return t;
   VarSubst inner = s;
   for (const auto& v : t.sum_vars) {
      inner.rename.erase(v.id);
      inner.columns.erase(v.id);
   }
   if (inner.empty()) return t;
   Term cur = t;
   auto range = subst_range(inner);
   VarSubst away;
   for (auto& v : cur.sum_vars) {
      if (!range.count(v.id)) continue;
      TupleVar fresh = fresh_var(v.schema);
      away.rename[v.id] = fresh;
      v = fresh;
   }
   auto apply = [](Term& x, const VarSubst& sub) {
      for (auto& p : x.preds) p = substitute(p, sub);
      for (auto& a : x.atoms) {
         if (auto it = sub.rename.find(a.var.id); it != sub.rename.end())
            a.var = it->second;
         else if (sub.columns.count(a.var.id))
            throw SemanticError("cannot replace the columns of " + var_name(a.var) + " inside " + a.rel + "(...)");
      }
      if (x.squash) *x.squash = substitute(*x.squash, sub);
      if (x.negation) *x.negation = substitute(*x.negation, sub);
   };
   if (!away.empty()) apply(cur, away);
   apply(cur, inner);
   return cur;
}

Spnf substitute(const Spnf& s, const VarSubst& sub) {
   Spnf out;
   for (const auto& t : s.terms) out.terms.push_back(substitute(t, sub));
   return out;
}

std::size_t size(const Spnf& s) {
   std::size_t n = 0;
   for (const auto& t : s.terms) {
      n += 1 + t.sum_vars.size() + t.preds.size() + t.atoms.size();
      if (t.squash) n += size(*t.squash);
      if (t.negation) n += size(*t.negation);
   }
   return n;
}

// ---- products ----

Term term_product(const Term& a0, const Term& b0) {
   Term a = a0;
   Term b = b0;
   auto fa = free_vars(a);
   std::set<int> a_all = fa;
   for (const auto& v : a.sum_vars) a_all.insert(v.id);
   VarSubst rb;
   for (auto& v : b.sum_vars) {
      if (!a_all.count(v.id)) continue;
      TupleVar fresh = fresh_var(v.schema);
      rb.rename[v.id] = fresh;
   }
   if (!rb.empty()) {
      // rename bound variables of b by stripping and restoring its binders
      std::vector<TupleVar> vars = b.sum_vars;
      b.sum_vars.clear();
      b = substitute(b, rb);
      for (auto& v : vars)
         if (auto it = rb.rename.find(v.id); it != rb.rename.end()) v = it->second;
      b.sum_vars = vars;
   }
   auto fb = free_vars(b);
   VarSubst ra;
   for (auto& v : a.sum_vars)
      if (fb.count(v.id)) ra.rename[v.id] = fresh_var(v.schema);
   if (!ra.empty()) {
      std::vector<TupleVar> vars = a.sum_vars;
      a.sum_vars.clear();
      a = substitute(a, ra);
      for (auto& v : vars)
         if (auto it = ra.rename.find(v.id); it != ra.rename.end()) v = it->second;
      a.sum_vars = vars;
   }

   Term out;
   out.sum_vars = a.sum_vars;
   out.sum_vars.insert(out.sum_vars.end(), b.sum_vars.begin(), b.sum_vars.end());
   out.preds = a.preds;
   out.preds.insert(out.preds.end(), b.preds.begin(), b.preds.end());
   if (a.squash && b.squash)
      out.squash = spnf_product(*a.squash, *b.squash);
   else if (a.squash)
      out.squash = a.squash;
   else if (b.squash)
      out.squash = b.squash;
   if (a.negation && b.negation) {
      Spnf n = *a.negation;
      n.terms.insert(n.terms.end(), b.negation->terms.begin(), b.negation->terms.end());
      out.negation = n;
   } else if (a.negation) {
      out.negation = a.negation;
   } else if (b.negation) {
      out.negation = b.negation;
   }
   out.atoms = a.atoms;
   out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
   return out;
}

Spnf spnf_product(const Spnf& a, const Spnf& b) {
   Spnf out;
   for (const auto& ta : a.terms)
      for (const auto& tb : b.terms) out.terms.push_back(term_product(ta, tb));
   return out;
}

// ---- normalization ----

namespace {

class Normalizer {
 public:
   explicit Normalizer(Session* s) : session_(s) {}

   Spnf run(const Expr& e, Path& path) {
      tick();
      switch (e->kind) {
         case ExprNode::Kind::Zero: return {};
         case ExprNode::Kind::One: return Spnf{{Term{}}};
         case ExprNode::Kind::Pred: {
            Term t;
            t.preds.push_back(e->pred);
            return Spnf{{std::move(t)}};
         }
         case ExprNode::Kind::Rel: {
            Term t;
            t.atoms.push_back({e->rel, e->var});
            return Spnf{{std::move(t)}};
         }
         case ExprNode::Kind::Add: {
            Spnf l = child(e->a, path, 0);
            Spnf r = child(e->b, path, 1);
            l.terms.insert(l.terms.end(), std::make_move_iterator(r.terms.begin()), std::make_move_iterator(r.terms.end()));
            return l;
         }
         case ExprNode::Kind::Mul: {
            Spnf l = child(e->a, path, 0);
            Spnf r = child(e->b, path, 1);
            if (l.terms.empty() || r.terms.empty()) return {};
            if (l.terms.size() > 1) log("distr-prod-plus-r", path);
            if (r.terms.size() > 1) log("distr-prod-plus-l", path);
            bool sum_l = false, sum_r = false, sq = false, ng = false, comm = false;
            for (const auto& a : l.terms)
               for (const auto& b : r.terms) {
                  sum_r |= !a.sum_vars.empty();
                  sum_l |= !b.sum_vars.empty();
                  sq |= a.squash && b.squash;
                  ng |= a.negation && b.negation;
                  comm |= !b.preds.empty() && (a.squash || a.negation || !a.atoms.empty());
               }
            if (sum_l) log("pull-sum-l", path);
            if (sum_r) log("pull-sum-r", path);
            if (sq) log("pull-merely", path);
            if (ng) log("pull-not", path);
            if (comm) log("prod-comm", path);
            Spnf out = spnf_product(l, r);
            guard(out);
            return out;
         }
         case ExprNode::Kind::Squash: {
            Spnf inner = child(e->a, path, 0);
            if (inner.terms.empty()) {
               log("squash-zero", path);
               return {};
            }
            for (const auto& t : inner.terms) {
               if (t.is_unit()) {
                  log("squash-one-plus", path);
                  return Spnf{{Term{}}};
               }
            }
            if (inner.terms.size() == 1 && inner.terms[0].is_pure_squash()) return inner;
            Term t;
            t.squash = std::move(inner);
            return Spnf{{std::move(t)}};
         }
         case ExprNode::Kind::Not: {
            Spnf inner = child(e->a, path, 0);
            if (inner.terms.empty()) {
               log("not-zero", path);
               return Spnf{{Term{}}};
            }
            Term t;
            t.negation = std::move(inner);
            return Spnf{{std::move(t)}};
         }
         case ExprNode::Kind::Sum: {
            Spnf body = child(e->a, path, 0);
            if (body.terms.size() > 1) log("distr-sum", path);
            for (auto& t : body.terms) {
               TupleVar v = e->var;
               bool shadowed = false;
               for (const auto& w : t.sum_vars) shadowed |= w == v;
               if (shadowed) v = fresh_var(v.schema);
               t.sum_vars.insert(t.sum_vars.begin(), v);
            }
            return body;
         }
      }
      return {};
   }

 private:
   Session* session_;

   Spnf child(const Expr& e, Path& path, int index) {
      path.push_back(index);
      Spnf out = run(e, path);
      path.pop_back();
      return out;
   }

   void log(const char* rule, const Path& path) {
      if (session_) {
         session_->trace.rule(rule, path.empty() && !session_->trace_prefix.empty() ? session_->trace_prefix : session_->trace_prefix + path_string(path));
         ++session_->stats.normalize_steps;
      }
   }

   void tick() {
      if (session_) session_->budget.tick();
   }

   void guard(const Spnf& s) {
      std::size_t limit = session_ ? session_->node_limit : 1000000;
      if (s.terms.size() > limit || size(s) > limit) throw ResourceExhausted("normal form exceeds node limit");
   }
};

bool is_term_shape(const Expr& e) {
   Expr cur = e;
   while (cur->kind == ExprNode::Kind::Sum) cur = cur->a;
   std::vector<Expr> factors;
   std::function<void(const Expr&)> flat = [&](const Expr& x) {
      if (x->kind == ExprNode::Kind::Mul) {
         flat(x->a);
         flat(x->b);
      } else {
         factors.push_back(x);
      }
   };
   flat(cur);
   int squashes = 0, negations = 0;
   for (const auto& f : factors) {
      switch (f->kind) {
         case ExprNode::Kind::One:
         case ExprNode::Kind::Pred:
         case ExprNode::Kind::Rel: break;
         case ExprNode::Kind::Squash:
            if (++squashes > 1 || !is_spnf(f->a)) return false;
            break;
         case ExprNode::Kind::Not:
            if (++negations > 1 || !is_spnf(f->a)) return false;
            break;
         default: return false;
      }
   }
   return true;
}

bool check_term(const Term& t, std::set<int> bound, const std::set<int>& free) {
   for (const auto& v : t.sum_vars) {
      if (!v.schema) return false;
      if (!bound.insert(v.id).second) return false;
   }
   for (const auto& a : t.atoms)
      if (!free.empty() && !bound.count(a.var.id) && !free.count(a.var.id)) return false;
   for (const auto& p : t.preds)
      if (!p.lhs || !p.rhs) return false;
   auto check_slot = [&](const Box<Spnf>& slot) {
      if (!slot) return true;
      if (slot->terms.empty()) return false;
      for (const auto& x : slot->terms)
         if (!check_term(x, bound, free)) return false;
      return true;
   };
   return check_slot(t.squash) && check_slot(t.negation);
}

} // namespace

Spnf to_spnf(const Expr& e, Session* session) {
   Path path;
   return Normalizer(session).run(e, path);
}

Expr to_uexp(const Term& t) {
   std::vector<Expr> factors;
   for (const auto& p : t.preds) factors.push_back(pred(p));
   if (t.squash) factors.push_back(squash(to_uexp(*t.squash)));
   if (t.negation) factors.push_back(neg(to_uexp(*t.negation)));
   for (const auto& a : t.atoms) factors.push_back(rel(a.rel, a.var));
   return sum_all(t.sum_vars, mul_all(factors));
}

Expr to_uexp(const Spnf& s) {
   std::vector<Expr> terms;
   for (const auto& t : s.terms) terms.push_back(to_uexp(t));
   return add_all(terms);
}

bool is_spnf(const Expr& e) {
   if (e->kind == ExprNode::Kind::Zero) return true;
   if (e->kind == ExprNode::Kind::Add) return is_spnf(e->a) && is_spnf(e->b) && e->a->kind != ExprNode::Kind::Zero && e->b->kind != ExprNode::Kind::Zero;
   return is_term_shape(e);
}

bool check_spnf(const Spnf& s, const std::set<int>& free) {
   for (const auto& t : s.terms)
      if (!check_term(t, {}, free)) return false;
   return true;
}

std::string to_string(const Spnf& s, Printer& p) {
   if (s.terms.empty()) return "0";
   std::string out;
   for (std::size_t i = 0; i < s.terms.size(); ++i) {
      if (i) out += "\n  + ";
      out += p(to_uexp(s.terms[i]));
   }
   return out;
}

std::string to_string(const Spnf& s, PrintOptions opt) {
   Printer p(opt);
   return to_string(s, p);
}

} // namespace ueq

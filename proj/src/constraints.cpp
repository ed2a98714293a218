#include "ueq/constraints.hpp"

#include <algorithm>

#include "ueq/decision.hpp"

namespace ueq {

namespace {

void log(Session& s, const char* rule, const std::string& path) {
   s.trace.rule(rule, path.empty() ? "/" : path);
   ++s.stats.canonize_steps;
}

/// Substitution into the scope of the term's own binders.
Term open_substitute(Term t, const VarSubst& sub) {
   std::vector<TupleVar> vars = std::move(t.sum_vars);
   t.sum_vars.clear();
   t = substitute(t, sub);
   t.sum_vars = std::move(vars);
   return t;
}

void collect_term(const Term& t, std::map<int, TupleVar>& out);

void collect_spnf(const Spnf& s, std::map<int, TupleVar>& out) {
   for (const auto& t : s.terms) collect_term(t, out);
}

void collect_term(const Term& t, std::map<int, TupleVar>& out) {
   std::map<int, TupleVar> inner;
   for (const auto& p : t.preds) {
      collect_free(p.lhs, inner);
      collect_free(p.rhs, inner);
   }
   for (const auto& a : t.atoms) inner.emplace(a.var.id, a.var);
   if (t.squash) collect_spnf(*t.squash, inner);
   if (t.negation) collect_spnf(*t.negation, inner);
   for (const auto& v : t.sum_vars) inner.erase(v.id);
   out.insert(inner.begin(), inner.end());
}

bool in_relation(const Spnf& s, int id);

bool in_relation(const Term& t, int id) {
   for (const auto& a : t.atoms)
      if (a.var.id == id) return true;
   return (t.squash && in_relation(*t.squash, id)) || (t.negation && in_relation(*t.negation, id));
}

bool in_relation(const Spnf& s, int id) {
   for (const auto& t : s.terms)
      if (in_relation(t, id)) return true;
   return false;
}

bool is_sum_var(const Term& t, int id) {
   for (const auto& v : t.sum_vars)
      if (v.id == id) return true;
   return false;
}

void drop_sum_var(Term& t, int id) {
   t.sum_vars.erase(std::remove_if(t.sum_vars.begin(), t.sum_vars.end(), [&](const TupleVar& v) { return v.id == id; }),
                    t.sum_vars.end());
}

std::vector<PredAtom> concat(const std::vector<PredAtom>& a, const std::vector<PredAtom>& b) {
   std::vector<PredAtom> out = a;
   out.insert(out.end(), b.begin(), b.end());
   return out;
}

std::vector<PredAtom> eqs_only(const std::vector<PredAtom>& ps) {
   std::vector<PredAtom> out;
   for (const auto& p : ps)
      if (p.kind == PredAtom::Kind::Eq) out.push_back(p);
   return out;
}

bool preds_only(const Term& t) {
   return t.sum_vars.empty() && t.atoms.empty() && !t.squash && !t.negation;
}

/// One summation variable eliminated by the equalities of the term.
bool eliminate_one(Term& t, Congruence& cc, Session& s, const CanonContext& ctx) {
   std::map<int, TupleVar> scope;
   collect_term(t, scope);
   for (const auto& p : ctx.outer) {
      collect_free(p.lhs, scope);
      collect_free(p.rhs, scope);
   }
   std::vector<TupleVar> candidates;
   for (const auto& [_, v] : scope) candidates.push_back(v);
   for (const auto& v : t.sum_vars) candidates.push_back(v);

   for (std::size_t k = 0; k < t.sum_vars.size(); ++k) {
      const TupleVar v = t.sum_vars[k];
      const std::size_t width = v.schema->size();
      for (const auto& w : candidates) {
         if (w == v || !same_shape(*v.schema, *w.schema)) continue;
         bool all = true;
         for (std::size_t i = 0; i < width && all; ++i) all = cc.equal(attr(v, i), attr(w, i));
         if (!all) continue;
         VarSubst sub;
         sub.rename[v.id] = w;
         drop_sum_var(t, v.id);
         t = open_substitute(std::move(t), sub);
         log(s, "sum-subst-eq", ctx.path);
         return true;
      }
      if (v.schema->generic() || in_relation(t, v.id)) continue;
      std::vector<Scalar> repl;
      for (std::size_t i = 0; i < width; ++i) {
         for (const auto& m : cc.members_of(attr(v, i))) {
            if (free_vars(m).count(v.id)) continue;
            repl.push_back(m);
            break;
         }
         if (repl.size() != i + 1) break;
      }
      if (repl.size() != width) continue;
      VarSubst sub;
      sub.columns[v.id] = repl;
      drop_sum_var(t, v.id);
      t = open_substitute(std::move(t), sub);
      log(s, "sum-subst-eq", ctx.path);
      return true;
   }
   return false;
}

/// One application of a key identity, or a collapse of a repeated keyed atom.
bool key_once(Term& t, const KeyDecl& key, Congruence& cc, Session& s, const CanonContext& ctx) {
   for (std::size_t i = 0; i < t.atoms.size(); ++i) {
      if (t.atoms[i].rel != key.table) continue;
      for (std::size_t j = i + 1; j < t.atoms.size(); ++j) {
         if (t.atoms[j].rel != key.table) continue;
         const TupleVar u = t.atoms[i].var;
         const TupleVar v = t.atoms[j].var;
         if (u == v) {
            t.atoms.erase(t.atoms.begin() + static_cast<long>(j));
            log(s, "key", ctx.path);
            return true;
         }
         bool match = true;
         for (auto c : key.columns) match = match && cc.equal(attr(u, c), attr(v, c));
         if (!match) continue;
         std::size_t drop = j;
         if (!is_sum_var(t, v.id) && is_sum_var(t, u.id)) drop = i;
         const TupleVar keep = drop == j ? u : v;
         const TupleVar gone = drop == j ? v : u;
         t.atoms.erase(t.atoms.begin() + static_cast<long>(drop));
         for (std::size_t c = 0; c < keep.schema->size(); ++c) t.preds.push_back(eq_atom(attr(keep, c), attr(gone, c)));
         log(s, "key", ctx.path);
         return true;
      }
   }
   return false;
}

bool squash_square_once(Term& t, Session& s, const CanonContext& ctx) {
   for (std::size_t i = 0; i < t.atoms.size(); ++i)
      for (std::size_t j = i + 1; j < t.atoms.size(); ++j)
         if (t.atoms[i].rel == t.atoms[j].rel && t.atoms[i].var == t.atoms[j].var) {
            t.atoms.erase(t.atoms.begin() + static_cast<long>(j));
            log(s, "squash-square", ctx.path);
            return true;
         }
   return false;
}

/// One foreign-key step. `depth` records the chase generation of atom variables.
bool fk_once(Term& t, const ForeignKeyDecl& fk, FkMode mode, Congruence& cc, std::map<int, int>& depth, Session& s,
             const CanonContext& ctx) {
   auto target_schema = s.env->table(fk.target);
   if (!target_schema) return false;
   for (std::size_t i = 0; i < t.atoms.size(); ++i) {
      if (t.atoms[i].rel != fk.source) continue;
      const TupleVar src = t.atoms[i].var;
      bool satisfied = false;
      for (const auto& a : t.atoms) {
         if (a.rel != fk.target) continue;
         if (mode == FkMode::General) {
            satisfied = true;
            break;
         }
         bool all = true;
         for (std::size_t c = 0; c < fk.target_columns.size() && all; ++c)
            all = cc.equal(attr(a.var, fk.target_columns[c]), attr(src, fk.source_columns[c]));
         if (all) {
            satisfied = true;
            break;
         }
      }
      if (satisfied) continue;
      int d = depth.count(src.id) ? depth[src.id] : 0;
      if (d >= s.chase_depth) {
         s.chase_exhausted = true;
         continue;
      }
      TupleVar fresh = fresh_var(target_schema);
      depth[fresh.id] = d + 1;
      t.sum_vars.push_back(fresh);
      t.atoms.push_back({fk.target, fresh});
      for (std::size_t c = 0; c < fk.target_columns.size(); ++c)
         t.preds.push_back(eq_atom(attr(fresh, fk.target_columns[c]), attr(src, fk.source_columns[c])));
      log(s, "fk", ctx.path);
      return true;
   }
   return false;
}

Spnf canon_terms(const Spnf& e, Session& s, const CanonContext& ctx);

Spnf canon_term(Term t, Session& s, const CanonContext& ctx, std::map<int, int>& depth, int round = 0) {
   s.budget.tick();
   if (ctx.squash && t.squash) {
      Spnf inner = std::move(*t.squash);
      t.squash.reset();
      log(s, "squash-add-squash", ctx.path);
      Spnf expanded;
      for (const auto& x : inner.terms) expanded.terms.push_back(term_product(t, x));
      return canon_terms(expanded, s, ctx);
   }

   const FkMode mode = ctx.squash ? FkMode::SquashContext : FkMode::General;
   for (;;) {
      s.budget.tick();
      Congruence cc = make_congruence(concat(ctx.outer, t.preds), &s);
      if (cc.inconsistent()) return {};
      if (eliminate_one(t, cc, s, ctx)) continue;
      bool changed = false;
      for (const auto& key : s.env ? s.env->keys : std::vector<KeyDecl>{})
         if (!changed) changed = key_once(t, key, cc, s, ctx);
      if (changed) continue;
      if (ctx.squash && squash_square_once(t, s, ctx)) continue;
      for (const auto& fk : s.env ? s.env->foreign_keys : std::vector<ForeignKeyDecl>{})
         if (!changed) changed = fk_once(t, fk, mode, cc, depth, s, ctx);
      if (changed) continue;
      break;
   }
   t.preds = saturate_equalities(t.preds, &s, ctx.outer);

   CanonContext slot;
   slot.squash = true;
   slot.outer = concat(ctx.outer, eqs_only(t.preds));
   bool hoisted = false;
   if (t.squash) {
      slot.path = ctx.path + "/s";
      Spnf sq = canon_terms(*t.squash, s, slot);
      if (sq.terms.empty()) {
         log(s, "squash-zero", slot.path);
         return {};
      }
      bool unit = std::any_of(sq.terms.begin(), sq.terms.end(), [](const Term& x) { return x.is_unit(); });
      if (unit) {
         log(s, "squash-one-plus", slot.path);
         t.squash.reset();
      } else if (sq.terms.size() == 1 && preds_only(sq.terms[0])) {
         log(s, "pred-squash", slot.path);
         t.preds.insert(t.preds.end(), sq.terms[0].preds.begin(), sq.terms[0].preds.end());
         t.squash.reset();
         hoisted = true;
      } else {
         t.squash = std::move(sq);
      }
   }
   if (t.negation) {
      slot.path = ctx.path + "/n";
      Spnf ng = canon_terms(*t.negation, s, slot);
      if (ng.terms.empty()) {
         log(s, "not-zero", slot.path);
         t.negation.reset();
      } else {
         Congruence cc = make_congruence(concat(ctx.outer, t.preds), &s);
         for (const auto& x : ng.terms) {
            if (!preds_only(x)) continue;
            bool entailed = true;
            for (const auto& p : x.preds) {
               if (p.kind == PredAtom::Kind::Eq) {
                  entailed = entailed && cc.entails(p);
               } else {
                  bool found = false;
                  for (const auto& q : t.preds) found = found || cc.congruent(p, q);
                  entailed = entailed && found;
               }
            }
            if (entailed) {
               log(s, "not-add", slot.path);
               return {};
            }
         }
         t.negation = std::move(ng);
      }
   }
   if (hoisted && round < 4) return canon_term(std::move(t), s, ctx, depth, round + 1);

   if (!ctx.squash && key_squash_applies(t, s, ctx)) {
      log(s, "key-squash", ctx.path);
      CanonContext inner = ctx;
      inner.squash = true;
      inner.path = ctx.path + "/s";
      Spnf body = canon_terms(Spnf{{std::move(t)}}, s, inner);
      if (body.terms.empty()) return {};
      if (std::any_of(body.terms.begin(), body.terms.end(), [](const Term& x) { return x.is_unit(); }))
         return Spnf{{Term{}}};
      Term w;
      w.squash = std::move(body);
      return Spnf{{std::move(w)}};
   }
   return Spnf{{std::move(t)}};
}

Spnf canon_terms(const Spnf& e, Session& s, const CanonContext& ctx) {
   Spnf out;
   for (std::size_t i = 0; i < e.terms.size(); ++i) {
      CanonContext sub = ctx;
      sub.path = ctx.path + "/" + std::to_string(i);
      std::map<int, int> depth;
      Spnf r = canon_term(e.terms[i], s, sub, depth);
      for (auto& x : r.terms) out.terms.push_back(std::move(x));
   }
   return out;
}

} // namespace

Congruence make_congruence(const std::vector<PredAtom>& preds, Session* session) {
   Congruence::AggEqual hook;
   if (session)
      hook = [session](const Scalar& a, const Scalar& b, const std::vector<PredAtom>& ctx) {
         return aggregates_equal(a, b, ctx, *session);
      };
   Congruence cc(hook);
   cc.assume_all(preds);
   return cc;
}

std::vector<PredAtom> saturate_equalities(const std::vector<PredAtom>& preds, Session* session,
                                          const std::vector<PredAtom>& outer) {
   Congruence cc = make_congruence(concat(outer, preds), session);
   std::vector<Scalar> among;
   for (const auto& p : preds)
      if (p.kind == PredAtom::Kind::Eq) {
         among.push_back(p.lhs);
         among.push_back(p.rhs);
      }
   std::vector<PredAtom> out;
   if (!among.empty()) out = cc.equalities(among);
   std::vector<PredAtom> cmps;
   for (const auto& p : preds) {
      if (p.kind != PredAtom::Kind::Cmp) continue;
      bool dup = false;
      for (const auto& q : cmps) dup = dup || cc.congruent(p, q);
      if (!dup) cmps.push_back(p);
   }
   std::sort(cmps.begin(), cmps.end(), [](const PredAtom& a, const PredAtom& b) { return compare(a, b) < 0; });
   out.insert(out.end(), cmps.begin(), cmps.end());
   return out;
}

Term eliminate_sums(const Term& t0, Session& session, const CanonContext& ctx) {
   Term t = t0;
   for (;;) {
      Congruence cc = make_congruence(concat(ctx.outer, t.preds), &session);
      if (!eliminate_one(t, cc, session, ctx)) break;
   }
   t.preds = saturate_equalities(t.preds, &session, ctx.outer);
   return t;
}

Term apply_key(const Term& t0, const KeyDecl& key, Session& session, const CanonContext& ctx) {
   Term t = t0;
   for (;;) {
      Congruence cc = make_congruence(concat(ctx.outer, t.preds), &session);
      if (!key_once(t, key, cc, session, ctx)) break;
   }
   return t;
}

Spnf apply_fk(const Spnf& e, const ForeignKeyDecl& fk, FkMode mode, Session& session, const CanonContext& ctx) {
   Spnf out;
   for (auto t : e.terms) {
      std::map<int, int> depth;
      for (;;) {
         Congruence cc = make_congruence(concat(ctx.outer, t.preds), &session);
         if (!fk_once(t, fk, mode, cc, depth, session, ctx)) break;
      }
      out.terms.push_back(std::move(t));
   }
   return out;
}

bool key_squash_applies(const Term& t, Session& s, const CanonContext& ctx) {
   if (t.sum_vars.empty() || !s.env) return false;
   for (const auto& a : t.atoms)
      if (s.env->keys_of(a.rel).empty()) return false;
   Congruence cc = make_congruence(concat(ctx.outer, t.preds), &s);
   std::set<int> known;
   std::set<int> bound;
   for (const auto& v : t.sum_vars) bound.insert(v.id);
   auto in_scope = [&](const Scalar& x, int self) {
      for (int id : free_vars(x))
         if (id == self || (bound.count(id) && !known.count(id))) return false;
      return true;
   };
   bool progress = true;
   while (progress) {
      progress = false;
      for (const auto& v : t.sum_vars) {
         if (known.count(v.id)) continue;
         bool pinned = false;
         for (const auto& a : t.atoms) {
            if (a.var != v || pinned) continue;
            for (const KeyDecl* key : s.env->keys_of(a.rel)) {
               bool all = true;
               for (auto c : key->columns) {
                  bool found = false;
                  for (const auto& m : cc.members_of(attr(v, c))) found = found || in_scope(m, v.id);
                  all = all && found;
               }
               if (all) {
                  pinned = true;
                  break;
               }
            }
         }
         if (pinned) {
            known.insert(v.id);
            progress = true;
         }
      }
   }
   return known.size() == bound.size();
}

Spnf canonize(const Spnf& e, Session& session, const CanonContext& ctx) {
   return canon_terms(e, session, ctx);
}

} // namespace ueq

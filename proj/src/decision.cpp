#include "ueq/decision.hpp"

#include <algorithm>

#include "ueq/constraints.hpp"

namespace ueq {

namespace {

thread_local int agg_depth = 0;

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

Term open_substitute(Term t, const VarSubst& sub) {
   std::vector<TupleVar> vars = std::move(t.sum_vars);
   t.sum_vars.clear();
   t = substitute(t, sub);
   t.sum_vars = std::move(vars);
   return t;
}

std::vector<std::pair<std::string, int>> atom_keys(const Term& t) {
   std::vector<std::pair<std::string, int>> out;
   for (const auto& a : t.atoms) out.emplace_back(a.rel, a.var.id);
   std::sort(out.begin(), out.end());
   return out;
}

/// Relation names a variable occurs with, as a sorted list.
std::vector<std::string> occurrence(const Term& t, int id) {
   std::vector<std::string> out;
   for (const auto& a : t.atoms)
      if (a.var.id == id) out.push_back(a.rel);
   std::sort(out.begin(), out.end());
   return out;
}

std::vector<std::string> relation_names(const Term& t) {
   std::vector<std::string> out;
   for (const auto& a : t.atoms) out.push_back(a.rel);
   std::sort(out.begin(), out.end());
   return out;
}

/// Invariant signature of a term, shared by isomorphic terms.
std::string signature(const Term& t) {
   std::string s = std::to_string(t.sum_vars.size()) + (t.squash ? "S" : "-") + (t.negation ? "N" : "-");
   for (const auto& r : relation_names(t)) s += "," + r;
   return s;
}

void collect_vars(const Term& t, std::map<int, TupleVar>& out);

void collect_vars(const Spnf& s, std::map<int, TupleVar>& out) {
   for (const auto& t : s.terms) collect_vars(t, out);
}

/// Variables occurring free in a term.
void collect_vars(const Term& t, std::map<int, TupleVar>& out) {
   std::map<int, TupleVar> inner;
   for (const auto& p : t.preds) {
      collect_free(p.lhs, inner);
      collect_free(p.rhs, inner);
   }
   for (const auto& a : t.atoms) inner.emplace(a.var.id, a.var);
   if (t.squash) collect_vars(*t.squash, inner);
   if (t.negation) collect_vars(*t.negation, inner);
   for (const auto& v : t.sum_vars) inner.erase(v.id);
   out.insert(inner.begin(), inner.end());
}

struct BijectionSearch {
   const Term& t1;
   const Term& t2;
   Session& session;
   const std::vector<PredAtom>& ctx;
   VarMap map;
   std::set<int> used;

   bool check() {
      VarSubst sub;
      sub.rename = map;
      Term r = open_substitute(t2, sub);
      r.sum_vars = t1.sum_vars;
      if (atom_keys(r) != atom_keys(t1)) return false;
      if (!congruent_preds(t1.preds, r.preds, &session, ctx)) return false;
      auto inner = concat(ctx, eqs_only(t1.preds));
      if (t1.squash && !sdp(*t1.squash, *r.squash, session, inner)) return false;
      if (t1.negation && !sdp(*t1.negation, *r.negation, session, inner)) return false;
      return true;
   }

   bool run(std::size_t k) {
      session.budget.tick();
      ++session.stats.search_steps;
      if (k == t2.sum_vars.size()) return check();
      const TupleVar& v = t2.sum_vars[k];
      auto occ = occurrence(t2, v.id);
      for (const auto& w : t1.sum_vars) {
         if (used.count(w.id) || !same_shape(*v.schema, *w.schema) || occurrence(t1, w.id) != occ) continue;
         map[v.id] = w;
         used.insert(w.id);
         if (run(k + 1)) return true;
         used.erase(w.id);
         map.erase(v.id);
      }
      return false;
   }
};

struct HomSearch {
   const Term& from;
   const Term& to;
   Session& session;
   Congruence cc;
   std::vector<TupleVar> targets;
   std::set<int> fixed;
   const std::vector<PredAtom>& ctx;
   VarMap map;

   bool atoms_ok(const TupleVar& v, const TupleVar& w) {
      for (const auto& a : from.atoms) {
         if (a.var != v) continue;
         bool found = false;
         for (const auto& b : to.atoms) found = found || (b.rel == a.rel && b.var == w);
         if (!found) return false;
      }
      return true;
   }

   bool check() {
      for (const auto& a : from.atoms)
         if (!map.count(a.var.id) && !atoms_ok(a.var, a.var)) return false;
      VarSubst sub;
      sub.rename = map;
      Term img = open_substitute(from, sub);
      for (const auto& p : img.preds) {
         if (p.kind == PredAtom::Kind::Eq) {
            if (!cc.entails(p)) return false;
            continue;
         }
         bool found = false;
         for (const auto& q : to.preds) found = found || cc.congruent(p, q);
         if (!found) return false;
      }
      if (img.negation) {
         if (!to.negation) return false;
         if (!sdp(*img.negation, *to.negation, session, concat(ctx, eqs_only(to.preds)))) return false;
      }
      if (img.squash) {
         if (!to.squash) return false;
         if (!sdp(*img.squash, *to.squash, session, concat(ctx, eqs_only(to.preds)))) return false;
      }
      return true;
   }

   bool run(std::size_t k) {
      session.budget.tick();
      ++session.stats.search_steps;
      if (k == from.sum_vars.size()) return check();
      const TupleVar& v = from.sum_vars[k];
      if (fixed.count(v.id)) {
         map[v.id] = v;
         if (atoms_ok(v, v) && run(k + 1)) return true;
         map.erase(v.id);
         return false;
      }
      for (const auto& w : targets) {
         if (!same_shape(*v.schema, *w.schema) || !atoms_ok(v, w)) continue;
         map[v.id] = w;
         if (run(k + 1)) return true;
         map.erase(v.id);
      }
      return false;
   }
};

bool has_unit(const Spnf& s) {
   return std::any_of(s.terms.begin(), s.terms.end(), [](const Term& t) { return t.is_unit(); });
}

std::optional<VarMap> homomorphism(const Term& from, const Term& to, Session& session,
                                   const std::vector<PredAtom>& ctx, const std::set<int>& fixed) {
   if (!from.squash != !to.squash && from.squash) return std::nullopt;
   HomSearch h{from, to, session, make_congruence(concat(ctx, to.preds), &session), {}, fixed, ctx, {}};
   std::map<int, TupleVar> scope;
   collect_vars(from, scope);
   collect_vars(to, scope);
   for (const auto& p : ctx) {
      collect_free(p.lhs, scope);
      collect_free(p.rhs, scope);
   }
   for (const auto& v : to.sum_vars) h.targets.push_back(v);
   for (const auto& [id, v] : scope)
      if (!std::any_of(from.sum_vars.begin(), from.sum_vars.end(), [&](const TupleVar& x) { return x.id == id; }))
         h.targets.push_back(v);
   if (!h.run(0)) return std::nullopt;
   return h.map;
}

void log_minimize(Session& s, const std::string& path) {
   for (const char* rule : {"excluded-middle", "sum-subst-eq", "squash-sum-squash", "squash-square", "distr-sum",
                            "squash-one-plus"})
      s.trace.rule(rule, path.empty() ? "/" : path);
}

/// Variables mentioned by the negation slot stay fixed under minimization.
std::set<int> negation_vars(const Term& t) {
   std::set<int> out;
   if (t.negation) out = free_vars(*t.negation);
   return out;
}

} // namespace

std::string format_map(const VarMap& m) {
   std::string out = "{";
   bool first = true;
   for (const auto& [id, v] : m) {
      if (!first) out += ", ";
      first = false;
      out += "t" + std::to_string(id) + "->" + var_name(v);
   }
   return out + "}";
}

bool congruent_preds(const std::vector<PredAtom>& p1, const std::vector<PredAtom>& p2, Session* session,
                     const std::vector<PredAtom>& ctx) {
   Congruence c1 = make_congruence(concat(ctx, p1), session);
   Congruence c2 = make_congruence(concat(ctx, p2), session);
   auto covered = [](const std::vector<PredAtom>& ps, const std::vector<PredAtom>& others, Congruence& cc) {
      for (const auto& p : ps) {
         if (p.kind == PredAtom::Kind::Eq) {
            if (!cc.entails(p)) return false;
            continue;
         }
         bool found = false;
         for (const auto& q : others) found = found || cc.congruent(p, q);
         if (!found) return false;
      }
      return true;
   };
   return covered(p2, p1, c1) && covered(p1, p2, c2);
}

bool tdp(const Term& t1, const Term& t2, Session& session, const std::vector<PredAtom>& ctx) {
   if (signature(t1) != signature(t2)) return false;
   BijectionSearch search{t1, t2, session, ctx, {}, {}};
   if (!search.run(0)) return false;
   session.trace.line("BIJECTION " + format_map(search.map));
   return true;
}

bool udp(const Spnf& e1, const Spnf& e2, Session& session, const std::vector<PredAtom>& ctx) {
   CanonContext c;
   c.outer = ctx;
   c.path = "/lhs";
   Spnf a = canonize(e1, session, c);
   c.path = "/rhs";
   Spnf b = canonize(e2, session, c);
   const std::size_t n = a.terms.size();
   if (n != b.terms.size()) return false;

   std::vector<std::vector<int>> ok(n, std::vector<int>(n, -1));
   auto edge = [&](std::size_t i, std::size_t j) {
      if (ok[i][j] < 0) ok[i][j] = tdp(a.terms[i], b.terms[j], session, ctx) ? 1 : 0;
      return ok[i][j] == 1;
   };
   std::vector<int> match_b(n, -1);
   std::function<bool(std::size_t, std::vector<char>&)> augment = [&](std::size_t i, std::vector<char>& seen) {
      for (std::size_t j = 0; j < n; ++j) {
         if (seen[j] || !edge(i, j)) continue;
         seen[j] = 1;
         if (match_b[j] < 0 || augment(static_cast<std::size_t>(match_b[j]), seen)) {
            match_b[j] = static_cast<int>(i);
            return true;
         }
      }
      return false;
   };
   for (std::size_t i = 0; i < n; ++i) {
      std::vector<char> seen(n, 0);
      if (!augment(i, seen)) return false;
   }
   std::vector<int> perm(n);
   for (std::size_t j = 0; j < n; ++j) perm[static_cast<std::size_t>(match_b[j])] = static_cast<int>(j);
   std::string line = "PERMUTATION [";
   for (std::size_t i = 0; i < n; ++i) line += (i ? ", " : "") + std::to_string(perm[i]);
   session.trace.line(line + "]");
   return true;
}

std::optional<VarMap> find_homomorphism(const Term& from, const Term& to, Session& session,
                                        const std::vector<PredAtom>& ctx) {
   return homomorphism(from, to, session, ctx, {});
}

Term minimize(const Term& t0, Session& session, const std::vector<PredAtom>& ctx, const std::string& path) {
   Term t = t0;
   bool progress = true;
   while (progress) {
      progress = false;
      const auto fixed = negation_vars(t);
      for (const auto& v : t.sum_vars) {
         if (fixed.count(v.id)) continue;
         Term reduced = t;
         reduced.sum_vars.erase(std::remove(reduced.sum_vars.begin(), reduced.sum_vars.end(), v), reduced.sum_vars.end());
         reduced.atoms.erase(std::remove_if(reduced.atoms.begin(), reduced.atoms.end(),
                                            [&](const RelAtom& a) { return a.var == v; }),
                             reduced.atoms.end());
         reduced.preds.erase(std::remove_if(reduced.preds.begin(), reduced.preds.end(),
                                            [&](const PredAtom& p) { return free_vars(p).count(v.id) > 0; }),
                             reduced.preds.end());
         if (reduced.squash && free_vars(*reduced.squash).count(v.id)) continue;
         if (!homomorphism(t, reduced, session, ctx, fixed)) continue;
         log_minimize(session, path);
         t = std::move(reduced);
         progress = true;
         break;
      }
   }
   return t;
}

bool sdp(const Spnf& s1, const Spnf& s2, Session& session, const std::vector<PredAtom>& ctx) {
   CanonContext c;
   c.squash = true;
   c.outer = ctx;
   c.path = "/sq1";
   Spnf a = canonize(s1, session, c);
   c.path = "/sq2";
   Spnf b = canonize(s2, session, c);
   if (a.terms.empty() || b.terms.empty()) return a.terms.empty() && b.terms.empty();
   if (has_unit(a) || has_unit(b)) return has_unit(a) && has_unit(b);

   auto reduce = [&](Spnf& s, const std::string& path) {
      for (std::size_t i = 0; i < s.terms.size(); ++i)
         s.terms[i] = minimize(s.terms[i], session, ctx, path + "/" + std::to_string(i));
      std::vector<Term> kept;
      for (std::size_t i = 0; i < s.terms.size(); ++i) {
         bool redundant = false;
         for (std::size_t j = 0; j < s.terms.size() && !redundant; ++j) {
            if (i == j) continue;
            // a later term is dropped in favour of an earlier equivalent one
            bool ji = homomorphism(s.terms[j], s.terms[i], session, ctx, {}).has_value();
            if (!ji) continue;
            bool ij = homomorphism(s.terms[i], s.terms[j], session, ctx, {}).has_value();
            redundant = !ij || j < i;
         }
         if (!redundant) kept.push_back(s.terms[i]);
      }
      s.terms = std::move(kept);
   };
   reduce(a, "/sq1");
   reduce(b, "/sq2");

   auto covers = [&](const Spnf& x, const Spnf& y) {
      for (const auto& tx : x.terms) {
         bool found = false;
         for (const auto& ty : y.terms) {
            if (auto h = homomorphism(ty, tx, session, ctx, {})) {
               session.trace.line("HOMOMORPHISM " + format_map(*h));
               found = true;
               break;
            }
         }
         if (!found) return false;
      }
      return true;
   };
   return covers(a, b) && covers(b, a);
}

bool aggregates_equal(const Scalar& a, const Scalar& b, const std::vector<PredAtom>& ctx, Session& session) {
   if (a->name != b->name || !same_shape(*a->var.schema, *b->var.schema)) return false;
   if (agg_depth >= 3) return false;
   ++agg_depth;
   bool result = false;
   try {
      Session sub;
      sub.env = session.env;
      sub.budget = session.budget;
      sub.chase_depth = session.chase_depth;
      sub.node_limit = session.node_limit;
      sub.trace.enabled = false;
      Expr body_b = rename(b->body, b->var, a->var);
      result = udp(to_spnf(a->body, &sub), to_spnf(body_b, &sub), sub, ctx);
      session.stats.search_steps += sub.stats.search_steps;
   } catch (...) {
      --agg_depth;
      throw;
   }
   --agg_depth;
   return result;
}

} // namespace ueq

#pragma once

#include <string>
#include <vector>

#include "ueq/congruence.hpp"
#include "ueq/frontend.hpp"
#include "ueq/session.hpp"
#include "ueq/spnf.hpp"

namespace ueq {

struct CanonContext {
   /// Inside a squash or negation: multiplicities beyond one are irrelevant.
   bool squash = false;
   /// Equalities that hold in the enclosing term.
   std::vector<PredAtom> outer;
   /// Trace location prefix.
   std::string path;
};

enum class FkMode { General, SquashContext };

/// Congruence over `preds` whose aggregates are compared by the decision procedure.
Congruence make_congruence(const std::vector<PredAtom>& preds, Session* session);

/// Closes the equalities of `preds` (together with `outer`) under symmetry and
/// transitivity, restricted to scalars occurring in `preds`; drops duplicates and
/// trivial atoms.
std::vector<PredAtom> saturate_equalities(const std::vector<PredAtom>& preds, Session* session,
                                          const std::vector<PredAtom>& outer = {});

/// Removes every summation variable determined by the term's equalities.
Term eliminate_sums(const Term& t, Session& session, const CanonContext& ctx = {});

/// Applies one key identity until no pair of atoms matches.
Term apply_key(const Term& t, const KeyDecl& key, Session& session, const CanonContext& ctx = {});

/// Applies one foreign-key identity to every term.
Spnf apply_fk(const Spnf& e, const ForeignKeyDecl& fk, FkMode mode, Session& session, const CanonContext& ctx = {});

/// A term whose summation variables are all pinned by keys, over keyed atoms only,
/// takes values in {0, 1} and may be replaced by its squash.
bool key_squash_applies(const Term& t, Session& session, const CanonContext& ctx = {});

/// Equality closure, summation elimination, keys and foreign keys, to a fixpoint,
/// recursively inside squash and negation slots.
Spnf canonize(const Spnf& e, Session& session, const CanonContext& ctx = {});

} // namespace ueq

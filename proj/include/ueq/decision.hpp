#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ueq/session.hpp"
#include "ueq/spnf.hpp"

namespace ueq {

/// Bag equivalence: canonizes both sides and searches a permutation of terms
/// pairing each term with an isomorphic one.
bool udp(const Spnf& e1, const Spnf& e2, Session& session, const std::vector<PredAtom>& ctx = {});

/// Term isomorphism: a bijection of summation variables under which predicates are
/// congruent, squash slots are set-equal, negation slots are equal and atoms coincide.
bool tdp(const Term& t1, const Term& t2, Session& session, const std::vector<PredAtom>& ctx = {});

/// Set equivalence of ||s1|| and ||s2||.
bool sdp(const Spnf& s1, const Spnf& s2, Session& session, const std::vector<PredAtom>& ctx = {});

/// Both lists generate the same congruence (together with `ctx`), and every
/// comparison atom of one side has a congruent counterpart on the other.
bool congruent_preds(const std::vector<PredAtom>& p1, const std::vector<PredAtom>& p2, Session* session,
                     const std::vector<PredAtom>& ctx = {});

using VarMap = std::map<int, TupleVar>;

/// A map of the summation variables of `from` into the variables of `to` (other
/// variables fixed) sending atoms to atoms and predicates to consequences of `to`.
/// Its existence proves to <= from under set semantics.
std::optional<VarMap> find_homomorphism(const Term& from, const Term& to, Session& session,
                                        const std::vector<PredAtom>& ctx = {});

/// Drops summation variables whose removal leaves a homomorphically equivalent term.
/// Only valid for a term under a squash.
Term minimize(const Term& t, Session& session, const std::vector<PredAtom>& ctx = {}, const std::string& path = {});

/// Aggregates with the same function whose bodies are bag-equal under `ctx`.
bool aggregates_equal(const Scalar& a, const Scalar& b, const std::vector<PredAtom>& ctx, Session& session);

std::string format_map(const VarMap& m);

} // namespace ueq

#pragma once

#include <string>
#include <string_view>

#include "ueq/frontend.hpp"
#include "ueq/oracle.hpp"
#include "ueq/parser.hpp"

namespace ueq::test {

inline AnalyzedProgram load(std::string_view source) { return analyze(parse_program(source)); }

/// Relations to populate: every declared table.
inline GenOptions gen_options(std::uint64_t seed, int domain = 3) {
   GenOptions o;
   o.seed = seed;
   o.domain = domain;
   return o;
}

/// Number of generated databases on which the two queries disagree.
inline std::size_t disagreements(const QueryAst& a, const QueryAst& b, const SchemaEnv& env, std::size_t n,
                                 std::uint64_t seed = 7) {
   auto dbs = gen_instances(env, gen_options(seed), n).dbs;
   return differential_serial(a, b, env, dbs).disagreements;
}

} // namespace ueq::test

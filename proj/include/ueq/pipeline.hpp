#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ueq/frontend.hpp"
#include "ueq/session.hpp"

namespace ueq {

enum class Status { Equivalent, NotEquivalent, NotProved, ResourceExhausted };
enum class Fragment { UcqBag, UcqSet, General };

std::string_view to_string(Status s);
std::string_view to_string(Fragment f);

struct VerifyOptions {
   double timeout = 30;
   std::uint64_t max_steps = 200000000;
   int chase_depth = 3;
   std::size_t node_limit = 1000000;
   bool trace = true;
   bool dump_uexp = false;
   bool dump_spnf = false;
   bool refute = false;
   std::uint64_t seed = 1;
   /// Random databases tried by --refute.
   std::size_t refute_instances = 400;
};

struct VerifyResult {
   std::string name;
   Status status = Status::NotProved;
   Fragment fragment = Fragment::General;
   double ms = 0;
   Stats stats;
   bool chase_exhausted = false;
   std::string message;
   std::vector<std::string> trace;
   std::string uexp_lhs, uexp_rhs, spnf_lhs, spnf_rhs;
   /// Database on which the two queries differ, from --refute.
   std::optional<std::string> witness;
};

/// UCQ classification of a view-free, GROUP-BY-free query pair. Pairs touching a
/// relation with a key or foreign key are General.
Fragment classify(const QueryAst& q1, const QueryAst& q2, const SchemaEnv& env);

VerifyResult verify(const PreparedVerify& v, const SchemaEnv& env, const VerifyOptions& opt = {});

/// Runs every verify statement, on an OpenMP worker pool when `parallel` is set;
/// results keep source order.
std::vector<VerifyResult> verify_all(const AnalyzedProgram& program, const VerifyOptions& opt = {}, bool parallel = true);

/// Parses and analyzes `source`, then verifies every statement.
std::vector<VerifyResult> verify_source(std::string_view source, const VerifyOptions& opt = {});

/// Searches generated databases for one on which the queries differ.
std::optional<std::string> refute(const PreparedVerify& v, const SchemaEnv& env, std::uint64_t seed,
                                  std::size_t instances);

} // namespace ueq

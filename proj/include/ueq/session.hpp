#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace ueq {

struct SchemaEnv;

class Trace {
 public:
   bool enabled = true;

   void rule(const std::string& name, const std::string& path);
   void line(std::string text);
   const std::vector<std::string>& lines() const { return lines_; }
   /// Number of `RULE <name> ...` lines.
   std::size_t count_rule(const std::string& name) const;
   std::string text() const;

 private:
   std::vector<std::string> lines_;
};

class Budget {
 public:
   Budget() = default;
   Budget(double seconds, std::uint64_t max_steps);

   /// Counts one unit of work; throws ResourceExhausted past the deadline or step limit.
   void tick(std::uint64_t n = 1);
   std::uint64_t steps() const { return steps_; }

 private:
   std::chrono::steady_clock::time_point deadline_ = std::chrono::steady_clock::time_point::max();
   std::uint64_t max_steps_ = UINT64_MAX;
   std::uint64_t steps_ = 0;
};

struct Stats {
   std::uint64_t normalize_steps = 0;
   std::uint64_t canonize_steps = 0;
   std::uint64_t search_steps = 0;
};

/// Mutable state of one verification: constraints, trace, budget and counters.
struct Session {
   const SchemaEnv* env = nullptr;
   Trace trace;
   Budget budget;
   Stats stats;
   int chase_depth = 3;
   std::size_t node_limit = 1000000;
   bool chase_exhausted = false;
   /// Prepended to normalizer trace paths.
   std::string trace_prefix;
};

} // namespace ueq

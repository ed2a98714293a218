#include "ueq/session.hpp"

#include "ueq/errors.hpp"

namespace ueq {

void Trace::rule(const std::string& name, const std::string& path) {
   if (enabled) lines_.push_back("RULE " + name + " AT " + path);
}

void Trace::line(std::string text) {
   if (enabled) lines_.push_back(std::move(text));
}

std::size_t Trace::count_rule(const std::string& name) const {
   const std::string prefix = "RULE " + name + " AT ";
   std::size_t n = 0;
   for (const auto& l : lines_)
      if (l.compare(0, prefix.size(), prefix) == 0) ++n;
   return n;
}

std::string Trace::text() const {
   std::string out;
   for (const auto& l : lines_) out += l + "\n";
   return out;
}

Budget::Budget(double seconds, std::uint64_t max_steps)
    : deadline_(std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds))),
      max_steps_(max_steps) {}

void Budget::tick(std::uint64_t n) {
   steps_ += n;
   if (steps_ > max_steps_) throw ResourceExhausted("step budget exhausted");
   if ((steps_ & 0xff) < n || n > 0xff) {
      if (std::chrono::steady_clock::now() > deadline_) throw ResourceExhausted("time budget exhausted");
   }
}

} // namespace ueq

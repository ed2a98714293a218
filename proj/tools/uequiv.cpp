#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ueq/errors.hpp"
#include "ueq/parser.hpp"
#include "ueq/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
   std::ifstream in(path, std::ios::binary);
   if (!in) throw std::runtime_error("cannot open " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

nlohmann::json to_json(const ueq::VerifyResult& r, const std::string& trace_path) {
   nlohmann::json j;
   j["name"] = r.name;
   j["status"] = std::string(ueq::to_string(r.status));
   j["fragment"] = std::string(ueq::to_string(r.fragment));
   j["ms"] = r.ms;
   j["steps"] = {{"normalize", r.stats.normalize_steps}, {"canonize", r.stats.canonize_steps}, {"search", r.stats.search_steps}};
   j["chase_exhausted"] = r.chase_exhausted;
   if (!r.message.empty()) j["message"] = r.message;
   if (!trace_path.empty()) j["trace"] = trace_path;
   if (r.witness) j["witness"] = *r.witness;
   if (!r.uexp_lhs.empty()) j["uexp"] = {r.uexp_lhs, r.uexp_rhs};
   if (!r.spnf_lhs.empty()) j["spnf"] = {r.spnf_lhs, r.spnf_rhs};
   return j;
}

} // namespace

int main(int argc, char** argv) {
   CLI::App app{"Equivalence checker for SQL queries"};
   std::string file;
   ueq::VerifyOptions opt;
   std::string trace_dir;
   bool json = false;
   app.add_option("file", file, "program file")->required();
   app.add_option("--timeout", opt.timeout, "seconds per verify statement")->capture_default_str();
   app.add_option("--chase-depth", opt.chase_depth, "foreign-key chase depth")->capture_default_str();
   app.add_option("--trace", trace_dir, "write <name>.trace files into this directory");
   app.add_flag("--dump-uexp", opt.dump_uexp, "print U-expressions");
   app.add_flag("--dump-spnf", opt.dump_spnf, "print normal forms");
   app.add_flag("--refute", opt.refute, "search for a counterexample database when not proved");
   app.add_flag("--json", json, "print a JSON report");
   app.add_option("--seed", opt.seed, "random seed for --refute")->capture_default_str();
   CLI11_PARSE(app, argc, argv);
   opt.trace = !trace_dir.empty();

   ueq::AnalyzedProgram program;
   try {
      program = ueq::analyze(ueq::parse_program(read_file(file)));
   } catch (const std::exception& e) {
      std::cerr << file << ": " << e.what() << "\n";
      return 2;
   }

   auto results = ueq::verify_all(program, opt);
   nlohmann::json report = nlohmann::json::array();
   bool all = true;
   for (const auto& r : results) {
      all = all && r.status == ueq::Status::Equivalent;
      std::string trace_path;
      if (!trace_dir.empty()) {
         std::filesystem::create_directories(trace_dir);
         trace_path = (std::filesystem::path(trace_dir) / (r.name + ".trace")).string();
         std::ofstream out(trace_path);
         for (const auto& l : r.trace) out << l << "\n";
      }
      if (json) {
         report.push_back(to_json(r, trace_path));
         continue;
      }
      if (opt.dump_uexp) std::cout << r.name << " lhs: " << r.uexp_lhs << "\n" << r.name << " rhs: " << r.uexp_rhs << "\n";
      if (opt.dump_spnf) std::cout << r.name << " lhs spnf: " << r.spnf_lhs << "\n" << r.name << " rhs spnf: " << r.spnf_rhs << "\n";
      std::cout << r.name << ": " << ueq::to_string(r.status) << " (" << std::llround(r.ms) << " ms)\n";
      if (r.witness) std::cout << "counterexample:\n" << *r.witness;
      else if (opt.refute && r.status != ueq::Status::Equivalent) std::cout << "no counterexample found\n";
   }
   if (json) std::cout << report.dump(2) << "\n";
   return all ? 0 : 1;
}

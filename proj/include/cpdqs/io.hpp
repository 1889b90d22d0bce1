#ifndef CPDQS_IO_HPP
#define CPDQS_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpdqs/drivers.hpp"
#include "cpdqs/instance.hpp"

namespace cpdqs {

// --- canonical instance format -------------------------------------------
//
//   CPDQS 1
//   <n>
//   <l_1> ... <l_n>
//   u <i> <r> <value>           unary energy of rotamer r at position i
//   p <i> <j> <r> <s> <value>   pairwise energy, requires i < j
//
// Indices are 1-based.  '#' starts a comment, blank lines are ignored,
// omitted entries are zero, duplicate records are an error.

Instance parse_instance(std::istream& in, const std::string& name);
Instance parse_instance_file(const std::filesystem::path& path);

// Writes every nonzero energy as a record; parse(write(inst)) reproduces the
// instance up to all-zero pairwise blocks, which are equivalent to absent.
void write_instance(const Instance& inst, std::ostream& out);
void write_instance_file(const Instance& inst,
                         const std::filesystem::path& path);

// --- benchmark importer ----------------------------------------------------
//
// Reads weighted-CSP ("wcsp") files as distributed with the public rotamer
// design benchmarks:
//   <name> <nvars> <maxdomain> <nfunctions> <upper bound>
//   <domain sizes...>
// then per cost function a header <arity> <scope...> <default> <ntuples>
// followed by ntuples lines of <values...> <cost> (0-based values).  Cost
// functions on the same scope accumulate.  A zero-arity constant is folded
// into the unary energies of the first position, which shifts every feasible
// assignment by exactly that constant.  Arities above 2 are rejected.

Instance import_wcsp(std::istream& in, const std::string& name);
Instance import_wcsp_file(const std::filesystem::path& path);

// Dispatches on extension (.cpdqs / .wcsp); anything else is sniffed by its
// first line.  format_hint may force "canonical" or "wcsp".
Instance load_instance(const std::filesystem::path& path,
                       const std::string& format_hint = "");

// Semantic equality: same layout, same unary values, same pairwise energies
// with absent blocks equal to all-zero ones.
bool instances_equal(const Instance& a, const Instance& b, double tol = 0);

// --- results + trace CSV ---------------------------------------------------

std::string results_csv_header();
std::string results_csv_row(const std::string& instance_name, Index n, Index m,
                            const SolveReport& report);

std::string trace_csv_header();

// Observer that appends one CSV row per accepted iteration to out; the
// stream must outlive the returned callback.
ObserverFn<double> make_trace_observer(std::ostream& out);

// --- benchmark harness -----------------------------------------------------

struct BenchOptions {
  std::vector<Algorithm> algorithms = {Algorithm::Scsc, Algorithm::Scp};
  SpgConfig<double> cfg;
  double sigma = 1e7;
  RoundingRule rule = RoundingRule::GreedyEnergy;
  int restarts = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: honor CPDQS_THREADS, default 1
};

// Runs every algorithm over every .cpdqs/.wcsp file under dir (sorted by
// filename) and streams one ResultsCsv row per run to out.  A failing
// instance contributes an error row instead of aborting the sweep.
void run_bench(const std::filesystem::path& dir, const BenchOptions& options,
               std::ostream& out);

}  // namespace cpdqs

#endif  // CPDQS_IO_HPP

// Command-line front end: solve / exact / bench / convert.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cpdqs/drivers.hpp"
#include "cpdqs/io.hpp"

namespace {

using namespace cpdqs;

// Exit codes: 0 ok, CLI11's own codes for flag errors, then:
constexpr int kExitIoError = 2;      // unreadable/malformed instance files
constexpr int kExitSolverError = 3;  // line search, numeric, search space
constexpr int kExitInternal = 4;

struct SolverFlags {
  std::string algorithm = "scsc";
  double sigma = 1e7;
  std::uint64_t seed = 0;
  std::string init = "uniform";
  int restarts = 1;
  std::string round_rule = "greedy";
  SpgConfig<double> cfg;
  std::string direction_step = "spectral";
  std::string safeguard = "scaled";
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--algorithm", f.algorithm, "Solver: scsc or scp")
      ->check(CLI::IsMember({"scsc", "scp"}));
  cmd->add_option("--sigma", f.sigma, "Penalty weight (scp)");
  cmd->add_option("--seed", f.seed, "Base seed for random starts");
  cmd->add_option("--init", f.init, "Initial point: uniform or random")
      ->check(CLI::IsMember({"uniform", "random"}));
  cmd->add_option("--restarts", f.restarts, "Multistart count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--round-rule", f.round_rule, "Final rounding: max or greedy")
      ->check(CLI::IsMember({"max", "greedy"}));
  cmd->add_option("--eps", f.cfg.eps, "Stationarity tolerance");
  cmd->add_option("--eps-a", f.cfg.eps_a, "Per-step decrease tolerance");
  cmd->add_option("--eps-b", f.cfg.eps_b, "Windowed stall tolerance");
  cmd->add_option("--history", f.cfg.history_m, "Nonmonotone window M");
  cmd->add_option("--stall", f.cfg.stall_n, "Rounded-stall window N");
  cmd->add_option("--alpha0", f.cfg.alpha0, "Initial line-search step");
  cmd->add_option("--gamma", f.cfg.gamma, "Sufficient-decrease parameter");
  cmd->add_option("--sigma1", f.cfg.sigma1, "Interpolation safeguard lower factor");
  cmd->add_option("--sigma2", f.cfg.sigma2, "Interpolation safeguard upper factor");
  cmd->add_option("--lambda-min", f.cfg.lambda_min, "Spectral step lower bound");
  cmd->add_option("--lambda-max", f.cfg.lambda_max, "Spectral step upper bound");
  cmd->add_option("--direction-step", f.direction_step,
                  "Step inside the projected direction: spectral or unit")
      ->check(CLI::IsMember({"spectral", "unit"}));
  cmd->add_option("--safeguard", f.safeguard,
                  "Interpolation acceptance interval: scaled or literal")
      ->check(CLI::IsMember({"scaled", "literal"}));
  cmd->add_option("--max-iter", f.cfg.max_iter, "Iteration cap");
  cmd->add_option("--probe-period", f.cfg.probe_period,
                  "Round probe every p iterations");
}

SpgConfig<double> to_config(const SolverFlags& f) {
  SpgConfig<double> cfg = f.cfg;
  cfg.direction_step = f.direction_step == "unit" ? DirectionStep::Unit
                                                  : DirectionStep::Spectral;
  cfg.safeguard = f.safeguard == "literal" ? SafeguardMode::Literal
                                           : SafeguardMode::Scaled;
  return cfg;
}

RoundingRule to_rule(const SolverFlags& f) {
  return f.round_rule == "max" ? RoundingRule::MaxValue
                               : RoundingRule::GreedyEnergy;
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  return file;
}

int run_solve(const std::string& instance_path, const SolverFlags& flags,
              const std::string& trace_path, const std::string& out_path) {
  const Instance inst = load_instance(instance_path);
  const SpgConfig<double> cfg = to_config(flags);
  const RoundingRule rule = to_rule(flags);
  const Algorithm algo =
      flags.algorithm == "scp" ? Algorithm::Scp : Algorithm::Scsc;

  std::ofstream trace_file;
  ObserverFn<double> observer;
  if (!trace_path.empty()) {
    if (flags.restarts != 1)
      throw Error("--trace records a single run; use --restarts 1");
    trace_file.open(trace_path);
    if (!trace_file) throw Error("cannot open '" + trace_path + "' for writing");
    observer = make_trace_observer(trace_file);
  }

  SolveReport rep;
  if (flags.restarts == 1) {
    const InitPolicy init = flags.init == "random"
                                ? InitPolicy::random_dirichlet(flags.seed)
                                : InitPolicy::uniform_center();
    auto [assignment, report] =
        algo == Algorithm::Scsc
            ? solve_scsc(inst, cfg, init, rule, observer)
            : solve_scp(inst, cfg, PenaltyParams<double>(flags.sigma), init,
                        rule, observer);
    rep = report;
  } else {
    rep = multistart(inst, algo, flags.restarts, flags.seed, cfg, flags.sigma,
                     rule)
              .second;
  }

  std::ofstream out_file;
  std::ostream& out = open_or_stdout(out_path, out_file);
  out << results_csv_header() << "\n"
      << results_csv_row(inst.name(), inst.positions(), inst.dimension(), rep)
      << "\n";
  return 0;
}

int run_exact(const std::string& instance_path, const std::string& out_path) {
  const Instance inst = load_instance(instance_path);
  auto [assignment, report] = solve_exact(inst);
  std::cout << "optimum " << report.rounded_objective << "\n";
  std::cout << "choice";
  for (Index c : assignment.choice) std::cout << " " << c + 1;
  std::cout << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open '" + out_path + "' for writing");
    out << results_csv_header() << "\n"
        << results_csv_row(inst.name(), inst.positions(), inst.dimension(),
                           report)
        << "\n";
  }
  return 0;
}

int run_bench_cmd(const std::string& dir, const std::string& algorithms,
                  const SolverFlags& flags, const std::string& out_path) {
  BenchOptions options;
  options.algorithms.clear();
  std::stringstream ss(algorithms);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "scsc") options.algorithms.push_back(Algorithm::Scsc);
    else if (item == "scp") options.algorithms.push_back(Algorithm::Scp);
    else if (item == "exact") options.algorithms.push_back(Algorithm::Exact);
    else throw Error("unknown algorithm '" + item + "' in --algorithms");
  }
  if (options.algorithms.empty()) throw Error("--algorithms selected nothing");
  options.cfg = to_config(flags);
  options.sigma = flags.sigma;
  options.rule = to_rule(flags);
  options.restarts = flags.restarts;
  options.seed = flags.seed;

  std::ofstream out_file;
  std::ostream& out = open_or_stdout(out_path, out_file);
  run_bench(dir, options, out);
  return 0;
}

int run_convert(const std::string& in_path, const std::string& out_path,
                const std::string& in_format, const std::string& out_format) {
  if (out_format != "canonical")
    throw UnsupportedFormatError("convert writes the canonical format only");
  const Instance inst = load_instance(in_path, in_format);
  write_instance_file(inst, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotamer-assignment energy minimization via spectral projected gradient"};
  app.require_subcommand(1);

  SolverFlags flags;
  std::string instance_path, trace_path, out_path;
  std::string bench_dir, bench_algorithms = "scsc,scp";
  std::string convert_in, convert_out, convert_in_format,
      convert_format = "canonical";

  CLI::App* solve = app.add_subcommand("solve", "Run a relaxation solver");
  solve->add_option("--instance", instance_path, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  add_solver_flags(solve, flags);
  solve->add_option("--trace", trace_path, "Per-iteration CSV trace file");
  solve->add_option("--out", out_path, "Results CSV file (default stdout)");

  CLI::App* exact = app.add_subcommand("exact", "Exhaustive optimum");
  exact->add_option("--instance", instance_path, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  exact->add_option("--out", out_path, "Results CSV file");

  CLI::App* bench = app.add_subcommand("bench", "Sweep a directory of instances");
  bench->add_option("--dir", bench_dir, "Directory of .cpdqs/.wcsp files")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench->add_option("--algorithms", bench_algorithms,
                    "Comma list from scsc,scp,exact");
  add_solver_flags(bench, flags);
  bench->add_option("--out", out_path, "Results CSV file (default stdout)");

  CLI::App* convert = app.add_subcommand("convert", "Rewrite an instance file");
  convert->add_option("--in", convert_in, "Input instance")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--out", convert_out, "Output path")->required();
  convert->add_option("--in-format", convert_in_format,
                      "Force input format: canonical or wcsp");
  convert->add_option("--format", convert_format, "Output format (canonical)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return run_solve(instance_path, flags, trace_path, out_path);
    if (exact->parsed()) return run_exact(instance_path, out_path);
    if (bench->parsed())
      return run_bench_cmd(bench_dir, bench_algorithms, flags, out_path);
    if (convert->parsed())
      return run_convert(convert_in, convert_out, convert_in_format,
                         convert_format);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const UnsupportedFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const LineSearchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const SearchSpaceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

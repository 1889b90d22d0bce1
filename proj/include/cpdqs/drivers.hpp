#ifndef CPDQS_DRIVERS_HPP
#define CPDQS_DRIVERS_HPP

#include <Eigen/Core>

#include <cstdint>
#include <utility>

#include "cpdqs/energy.hpp"
#include "cpdqs/instance.hpp"
#include "cpdqs/rounding.hpp"
#include "cpdqs/spg.hpp"

namespace cpdqs {

enum class Algorithm { Scsc, Scp, Exact };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Scsc: return "scsc";
    case Algorithm::Scp: return "scp";
    case Algorithm::Exact: return "exact";
  }
  return "unknown";
}

// Choice of starting point for a solver run.
struct InitPolicy {
  enum class Kind { UniformCenter, RandomDirichlet, GivenVector };

  Kind kind = Kind::UniformCenter;
  std::uint64_t seed = 0;   // RandomDirichlet only
  Eigen::VectorXd given;    // GivenVector only

  static InitPolicy uniform_center() { return {}; }
  static InitPolicy random_dirichlet(std::uint64_t seed) {
    InitPolicy p;
    p.kind = Kind::RandomDirichlet;
    p.seed = seed;
    return p;
  }
  static InitPolicy given_vector(Eigen::VectorXd x) {
    InitPolicy p;
    p.kind = Kind::GivenVector;
    p.given = std::move(x);
    return p;
  }
};

// UniformCenter puts every block at its barycenter 1/l_i; RandomDirichlet
// draws each block uniformly from its unit simplex (normalized exponentials
// from a seeded generator, fully specified so runs reproduce bit-identically).
Eigen::VectorXd make_initial_point(const BlockLayout& layout,
                                   const InitPolicy& init);

// Snapshot of everything that determined a run, carried in its report.
struct SolveSettings {
  SpgConfig<double> spg;
  double sigma = 1e7;  // penalty weight, meaningful for the penalized driver
  RoundingRule rule = RoundingRule::GreedyEnergy;
  InitPolicy::Kind init_kind = InitPolicy::Kind::UniformCenter;
  int restarts = 1;
};

struct SolveReport {
  Algorithm algorithm = Algorithm::Scsc;
  double relaxed_objective = 0;    // f at the final relaxed iterate, unpenalized
  double penalized_objective = 0;  // penalized value at the iterate (scp); == relaxed otherwise
  double rounded_objective = 0;    // objective of the expanded rounded assignment
  long iterations = 0;
  double wall_time_seconds = 0;
  TerminationReason termination = TerminationReason::MaxIter;
  std::uint64_t seed = 0;
  long objective_evals = 0;
  long gradient_evals = 0;
  SolveSettings settings;
};

// Direct simplex-constrained relaxation: spectral projected gradient on f
// over the product of block simplices, then rounding.
std::pair<Assignment, SolveReport> solve_scsc(
    const Instance& inst, const SpgConfig<double>& cfg,
    const InitPolicy& init = InitPolicy::uniform_center(),
    RoundingRule rule = RoundingRule::GreedyEnergy,
    const ObserverFn<double>& observer = nullptr);

// Quadratic-penalty relaxation: spectral projected gradient on the penalized
// objective over the nonnegative orthant, then rounding.
std::pair<Assignment, SolveReport> solve_scp(
    const Instance& inst, const SpgConfig<double>& cfg,
    const PenaltyParams<double>& penalty,
    const InitPolicy& init = InitPolicy::uniform_center(),
    RoundingRule rule = RoundingRule::GreedyEnergy,
    const ObserverFn<double>& observer = nullptr);

// Exhaustive enumeration of all assignments; the oracle against which the
// relaxation drivers are checked.  Guarded to product(l_i) <= 10^7; ties
// resolve to the lexicographically smallest choice vector.
std::pair<Assignment, SolveReport> solve_exact(const Instance& inst);

inline constexpr double kExactSearchSpaceGuard = 1e7;

// Best of one UniformCenter run plus (restarts - 1) RandomDirichlet runs with
// seeds base_seed + 1 .. base_seed + restarts - 1.  The winner is the lowest
// rounded objective, ties to the earliest seed; deterministic given base_seed.
std::pair<Assignment, SolveReport> multistart(
    const Instance& inst, Algorithm algorithm, int restarts,
    std::uint64_t base_seed, const SpgConfig<double>& cfg, double sigma = 1e7,
    RoundingRule rule = RoundingRule::GreedyEnergy);

}  // namespace cpdqs

#endif  // CPDQS_DRIVERS_HPP

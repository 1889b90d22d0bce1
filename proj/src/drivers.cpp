#include "cpdqs/drivers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "cpdqs/projection.hpp"

namespace cpdqs {

namespace {

// 53-bit uniform in [0, 1) straight from the engine's output, so the stream
// does not depend on any library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct RelaxedRun {
  SpgResult<double> spg;
  Assignment rounded;
};

SolveReport make_report(const Instance& inst, Algorithm algo,
                        const RelaxedRun& run, const SolveSettings& settings,
                        std::uint64_t seed, double wall_seconds,
                        double penalized_value) {
  SolveReport rep;
  rep.algorithm = algo;
  rep.relaxed_objective = objective<double>(inst, run.spg.x);
  rep.penalized_objective = penalized_value;
  rep.rounded_objective =
      objective<double>(inst, expand(inst, run.rounded));
  rep.iterations = run.spg.iterations;
  rep.wall_time_seconds = wall_seconds;
  rep.termination = run.spg.reason;
  rep.seed = seed;
  rep.objective_evals = run.spg.objective_evals;
  rep.gradient_evals = run.spg.gradient_evals;
  rep.settings = settings;
  return rep;
}

}  // namespace

Eigen::VectorXd make_initial_point(const BlockLayout& layout,
                                   const InitPolicy& init) {
  switch (init.kind) {
    case InitPolicy::Kind::GivenVector:
      layout.check_conformal(init.given);
      return init.given;
    case InitPolicy::Kind::UniformCenter: {
      Eigen::VectorXd x(layout.total());
      for (Index i = 0; i < layout.blocks(); ++i)
        layout.segment(x, i).setConstant(1.0 / static_cast<double>(layout.size(i)));
      return x;
    }
    case InitPolicy::Kind::RandomDirichlet: {
      std::mt19937_64 rng(init.seed);
      Eigen::VectorXd x(layout.total());
      for (Index i = 0; i < layout.blocks(); ++i) {
        auto seg = layout.segment(x, i);
        double sum = 0;
        for (Index r = 0; r < layout.size(i); ++r) {
          // Exp(1) variates; normalizing them is uniform on the simplex.
          seg[r] = -std::log1p(-uniform01(rng));
          sum += seg[r];
        }
        if (sum > 0)
          seg /= sum;
        else
          seg.setConstant(1.0 / static_cast<double>(layout.size(i)));
      }
      return x;
    }
  }
  throw Error("unreachable init kind");
}

std::pair<Assignment, SolveReport> solve_scsc(const Instance& inst,
                                              const SpgConfig<double>& cfg,
                                              const InitPolicy& init,
                                              RoundingRule rule,
                                              const ObserverFn<double>& observer) {
  const BlockLayout& layout = inst.layout();
  Eigen::VectorXd x0 = make_initial_point(layout, init);

  const auto start = std::chrono::steady_clock::now();
  RelaxedRun run;
  run.spg = spg_minimize<double>(
      [&](const Eigen::VectorXd& x) { return objective<double>(inst, x); },
      [&](const Eigen::VectorXd& x) { return gradient<double>(inst, x); },
      [&](Eigen::VectorXd& x) { project_block_simplex_in_place(layout, x); },
      std::move(x0), cfg,
      [&](const Eigen::VectorXd& x) {
        return round_to_assignment<double>(inst, x, RoundingRule::MaxValue);
      },
      observer);
  run.rounded = round_to_assignment<double>(inst, run.spg.x, rule);
  const double wall = elapsed_seconds(start);

  SolveSettings settings;
  settings.spg = cfg;
  settings.rule = rule;
  settings.init_kind = init.kind;
  SolveReport rep = make_report(inst, Algorithm::Scsc, run, settings, init.seed,
                                wall, run.spg.f);
  return {run.rounded, rep};
}

std::pair<Assignment, SolveReport> solve_scp(const Instance& inst,
                                             const SpgConfig<double>& cfg,
                                             const PenaltyParams<double>& penalty,
                                             const InitPolicy& init,
                                             RoundingRule rule,
                                             const ObserverFn<double>& observer) {
  const BlockLayout& layout = inst.layout();
  Eigen::VectorXd x0 = make_initial_point(layout, init);

  const auto start = std::chrono::steady_clock::now();
  RelaxedRun run;
  run.spg = spg_minimize<double>(
      [&](const Eigen::VectorXd& x) {
        return penalized_objective<double>(inst, x, penalty);
      },
      [&](const Eigen::VectorXd& x) {
        return penalized_gradient<double>(inst, x, penalty);
      },
      [&](Eigen::VectorXd& x) { project_nonneg_in_place(x); }, std::move(x0),
      cfg,
      [&](const Eigen::VectorXd& x) {
        return round_to_assignment<double>(inst, x, RoundingRule::MaxValue);
      },
      observer);
  run.rounded = round_to_assignment<double>(inst, run.spg.x, rule);
  const double wall = elapsed_seconds(start);

  SolveSettings settings;
  settings.spg = cfg;
  settings.sigma = penalty.sigma;
  settings.rule = rule;
  settings.init_kind = init.kind;
  SolveReport rep = make_report(inst, Algorithm::Scp, run, settings, init.seed,
                                wall, run.spg.f);
  return {run.rounded, rep};
}

namespace {

// Depth-first enumeration with incremental partial energies.  Visiting the
// rotamers of each block in ascending order makes the first minimum found the
// lexicographically smallest one.
struct ExactSearch {
  const Instance& inst;
  std::vector<Index> choice;
  std::vector<Index> best;
  double best_value = std::numeric_limits<double>::infinity();
  long leaves = 0;

  explicit ExactSearch(const Instance& i)
      : inst(i),
        choice(static_cast<std::size_t>(i.positions())),
        best(static_cast<std::size_t>(i.positions())) {}

  void descend(Index depth, double partial) {
    const Index n = inst.positions();
    if (depth == n) {
      ++leaves;
      if (partial < best_value) {
        best_value = partial;
        best = choice;
      }
      return;
    }
    const Index l = inst.layout().size(depth);
    for (Index r = 0; r < l; ++r) {
      double cost = partial + inst.unary_energy(depth, r);
      for (Index i = 0; i < depth; ++i)
        cost += inst.pair_energy(i, choice[static_cast<std::size_t>(i)], depth, r);
      choice[static_cast<std::size_t>(depth)] = r;
      descend(depth + 1, cost);
    }
  }
};

}  // namespace

std::pair<Assignment, SolveReport> solve_exact(const Instance& inst) {
  double space = 1;
  for (Index i = 0; i < inst.positions(); ++i) {
    space *= static_cast<double>(inst.layout().size(i));
    if (space > kExactSearchSpaceGuard)
      throw SearchSpaceError(
          "search space exceeds the exhaustive-enumeration guard of " +
          std::to_string(static_cast<long>(kExactSearchSpaceGuard)));
  }

  const auto start = std::chrono::steady_clock::now();
  ExactSearch search(inst);
  search.descend(0, 0.0);
  const double wall = elapsed_seconds(start);

  Assignment a{std::move(search.best)};
  SolveReport rep;
  rep.algorithm = Algorithm::Exact;
  rep.relaxed_objective = search.best_value;
  rep.penalized_objective = search.best_value;
  rep.rounded_objective = search.best_value;
  rep.iterations = search.leaves;
  rep.wall_time_seconds = wall;
  rep.termination = TerminationReason::Enumerated;
  return {a, rep};
}

std::pair<Assignment, SolveReport> multistart(const Instance& inst,
                                              Algorithm algorithm, int restarts,
                                              std::uint64_t base_seed,
                                              const SpgConfig<double>& cfg,
                                              double sigma, RoundingRule rule) {
  if (restarts < 1) throw Error("multistart needs at least one restart");
  if (algorithm == Algorithm::Exact)
    throw Error("multistart applies to the relaxation drivers only");

  const auto run_one = [&](const InitPolicy& init) {
    return algorithm == Algorithm::Scsc
               ? solve_scsc(inst, cfg, init, rule)
               : solve_scp(inst, cfg, PenaltyParams<double>(sigma), init, rule);
  };

  auto best = run_one(InitPolicy::uniform_center());
  best.second.seed = base_seed;
  for (int r = 1; r < restarts; ++r) {
    auto cand = run_one(InitPolicy::random_dirichlet(base_seed + static_cast<std::uint64_t>(r)));
    // Strict improvement keeps the earliest seed on ties.
    if (cand.second.rounded_objective < best.second.rounded_objective)
      best = std::move(cand);
  }
  best.second.settings.restarts = restarts;
  return best;
}

}  // namespace cpdqs
